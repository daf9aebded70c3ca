/** Token card state machine and session bookkeeping.
 *
 * A card is always in exactly one of three states: unresolved, resolved
 * by accepting a suggestion rank, or resolved by a manual edit. Every
 * displayed gloss comes from the API response or from explicit user
 * input; nothing is synthesized here.
 */

import type { FeedbackOrigin, FeedbackPayload, GlossedToken } from './types';

export type Resolution =
  | { state: 'unresolved' }
  | { state: 'suggestion'; rank: number; gloss: string }
  | { state: 'manual'; gloss: string };

export interface TokenCard {
  position: number;
  word: string;
  suggestions: string[];
  injectedPair: [string, string] | null;
  evidence: GlossedToken['evidence'];
  resolution: Resolution;
  confirmed: boolean;
}

export interface SessionCounters {
  acceptedAtRank: [number, number, number];
  manualEdits: number;
}

export function emptyCounters(): SessionCounters {
  return { acceptedAtRank: [0, 0, 0], manualEdits: 0 };
}

export function cardsFromResponse(tokens: GlossedToken[]): TokenCard[] {
  return tokens.map((t, position) => ({
    position,
    word: t.word,
    suggestions: [...t.glosses],
    injectedPair: t.injectedPair,
    evidence: t.evidence,
    resolution: { state: 'unresolved' },
    confirmed: false,
  }));
}

export function glossHasWhitespace(gloss: string): boolean {
  return /\s/.test(gloss);
}

/** Select a suggestion rank (1-based). Returns the updated card or null
 * when the rank has no suggestion or the card is already confirmed. */
export function selectRank(card: TokenCard, rank: number): TokenCard | null {
  if (card.confirmed) return null;
  if (rank < 1 || rank > card.suggestions.length) return null;
  return {
    ...card,
    resolution: { state: 'suggestion', rank, gloss: card.suggestions[rank - 1] },
  };
}

/** Record a manual edit. Empty or whitespace-containing glosses are
 * rejected (the service enforces the same rule). */
export function editGloss(card: TokenCard, gloss: string): TokenCard | null {
  if (card.confirmed) return null;
  const trimmed = gloss.trim();
  if (!trimmed || glossHasWhitespace(trimmed)) return null;
  return { ...card, resolution: { state: 'manual', gloss: trimmed } };
}

export function confirm(card: TokenCard): TokenCard {
  if (card.resolution.state === 'unresolved') {
    throw new Error('cannot confirm an unresolved card');
  }
  return { ...card, confirmed: true };
}

export function resolvedGloss(card: TokenCard): string | null {
  return card.resolution.state === 'unresolved' ? null : card.resolution.gloss;
}

export function feedbackFor(
  cards: TokenCard[],
  card: TokenCard,
  translation: string,
  annotatorId: string,
): FeedbackPayload {
  if (card.resolution.state === 'unresolved') {
    throw new Error('no resolution to submit');
  }
  const origin: FeedbackOrigin =
    card.resolution.state === 'suggestion' ? 'accepted-suggestion' : 'manual-edit';
  return {
    tokens: cards.map((c) => c.word),
    translation,
    position: card.position,
    acceptedGloss: card.resolution.gloss,
    annotatorId,
    origin,
    rank: card.resolution.state === 'suggestion' ? card.resolution.rank : null,
  };
}

export function countResolution(counters: SessionCounters, card: TokenCard): SessionCounters {
  const next: SessionCounters = {
    acceptedAtRank: [...counters.acceptedAtRank] as [number, number, number],
    manualEdits: counters.manualEdits,
  };
  if (card.resolution.state === 'suggestion') {
    next.acceptedAtRank[card.resolution.rank - 1] += 1;
  } else if (card.resolution.state === 'manual') {
    next.manualEdits += 1;
  }
  return next;
}

export function nextUnresolved(cards: TokenCard[], from: number): number {
  for (let step = 1; step <= cards.length; step++) {
    const i = (from + step) % cards.length;
    if (!cards[i].confirmed) return i;
  }
  return -1;
}

export function allConfirmed(cards: TokenCard[]): boolean {
  return cards.length > 0 && cards.every((c) => c.confirmed);
}
