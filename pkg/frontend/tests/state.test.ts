import { describe, expect, it } from 'vitest';

import {
  allConfirmed,
  cardsFromResponse,
  confirm,
  countResolution,
  editGloss,
  emptyCounters,
  feedbackFor,
  nextUnresolved,
  resolvedGloss,
  selectRank,
} from '../src/state';
import type { GlossedToken } from '../src/types';

const EVIDENCE = {
  distribution: [
    ['hide-PST.UNW', 60],
    ['hide-PFV.CVB', 40],
  ] as [string, number][],
  features: ['PST.UNW', 'PFV.CVB'],
  exactExamples: [],
  approximateExamples: [],
  reverse: [],
};

function token(word: string, glosses: string[]): GlossedToken {
  return { word, glosses, injectedPair: null, evidence: EVIDENCE };
}

describe('cardsFromResponse', () => {
  it('builds one unresolved card per token, suggestions in rank order', () => {
    const cards = cardsFromResponse([
      token('uqʼno', ['hide-PST.UNW', 'hide-PFV.CVB', 'hide-INF']),
      token('ža', ['DEM1.SG']),
    ]);
    expect(cards).toHaveLength(2);
    expect(cards[0].suggestions).toEqual(['hide-PST.UNW', 'hide-PFV.CVB', 'hide-INF']);
    expect(cards[0].resolution.state).toBe('unresolved');
    expect(cards[1].position).toBe(1);
  });

  it('never invents glosses: suggestions mirror the response exactly', () => {
    const cards = cardsFromResponse([token('w', ['a', 'b'])]);
    expect(cards[0].suggestions).toEqual(['a', 'b']);
    expect(resolvedGloss(cards[0])).toBeNull();
  });
});

describe('selectRank / editGloss / confirm', () => {
  const card = cardsFromResponse([token('w', ['g1', 'g2', 'g3'])])[0];

  it('selects a valid rank', () => {
    const updated = selectRank(card, 2)!;
    expect(updated.resolution).toEqual({ state: 'suggestion', rank: 2, gloss: 'g2' });
  });

  it('rejects out-of-range ranks', () => {
    expect(selectRank(card, 0)).toBeNull();
    expect(selectRank(card, 4)).toBeNull();
  });

  it('rejects rank beyond the suggestion list length', () => {
    const short = cardsFromResponse([token('w', ['only'])])[0];
    expect(selectRank(short, 2)).toBeNull();
  });

  it('manual edit replaces a suggestion selection (one state at a time)', () => {
    const picked = selectRank(card, 1)!;
    const edited = editGloss(picked, 'hand-GLOSS')!;
    expect(edited.resolution).toEqual({ state: 'manual', gloss: 'hand-GLOSS' });
  });

  it('rejects whitespace in manual glosses', () => {
    expect(editGloss(card, 'two words')).toBeNull();
    expect(editGloss(card, '   ')).toBeNull();
    expect(editGloss(card, ' trimmed-OK ')!.resolution).toEqual({
      state: 'manual',
      gloss: 'trimmed-OK',
    });
  });

  it('confirm locks the card; further changes are rejected', () => {
    const done = confirm(selectRank(card, 1)!);
    expect(done.confirmed).toBe(true);
    expect(selectRank(done, 2)).toBeNull();
    expect(editGloss(done, 'x')).toBeNull();
  });

  it('cannot confirm an unresolved card', () => {
    expect(() => confirm(card)).toThrow();
  });
});

describe('feedbackFor', () => {
  const cards = cardsFromResponse([
    token('maħor', ['outside']),
    token('mec', ['language', 'tongue']),
  ]);

  it('accepting rank 2 produces origin accepted-suggestion with rank 2', () => {
    const picked = selectRank(cards[1], 2)!;
    const payload = feedbackFor(cards, picked, 'she poked her tongue out', 'annotator-1');
    expect(payload).toEqual({
      tokens: ['maħor', 'mec'],
      translation: 'she poked her tongue out',
      position: 1,
      acceptedGloss: 'tongue',
      annotatorId: 'annotator-1',
      origin: 'accepted-suggestion',
      rank: 2,
    });
  });

  it('manual edits carry origin manual-edit and null rank', () => {
    const edited = editGloss(cards[1], 'tongue-TOP')!;
    const payload = feedbackFor(cards, edited, 't', 'a');
    expect(payload.origin).toBe('manual-edit');
    expect(payload.rank).toBeNull();
    expect(payload.acceptedGloss).toBe('tongue-TOP');
  });

  it('refuses unresolved cards', () => {
    expect(() => feedbackFor(cards, cards[0], 't', 'a')).toThrow();
  });
});

describe('session counters', () => {
  it('tallies ranks and manual edits like the feedback log', () => {
    const cards = cardsFromResponse([token('w', ['a', 'b', 'c'])]);
    let counters = emptyCounters();
    counters = countResolution(counters, selectRank(cards[0], 2)!);
    counters = countResolution(counters, selectRank(cards[0], 2)!);
    counters = countResolution(counters, selectRank(cards[0], 1)!);
    counters = countResolution(counters, editGloss(cards[0], 'x')!);
    expect(counters.acceptedAtRank).toEqual([1, 2, 0]);
    expect(counters.manualEdits).toBe(1);
  });
});

describe('navigation', () => {
  it('nextUnresolved cycles past confirmed cards', () => {
    const cards = cardsFromResponse([
      token('a', ['x']),
      token('b', ['y']),
      token('c', ['z']),
    ]);
    cards[1] = confirm(selectRank(cards[1], 1)!);
    expect(nextUnresolved(cards, 0)).toBe(2);
    expect(nextUnresolved(cards, 2)).toBe(0);
    expect(allConfirmed(cards)).toBe(false);
  });

  it('allConfirmed only when every card is locked', () => {
    let cards = cardsFromResponse([token('a', ['x'])]);
    expect(allConfirmed(cards)).toBe(false);
    cards = [confirm(selectRank(cards[0], 1)!)];
    expect(allConfirmed(cards)).toBe(true);
  });
});
