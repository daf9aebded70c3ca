/** Wires the workbench to the annotation service: sentence loading,
 * keyboard-driven review, feedback submission, and the confusion
 * dashboard. Optimistic UI: a card locks only after the server confirms
 * the feedback write. */

import { ApiClient, ApiRequestError } from './api';
import { summaryLine, toRows } from './confusions';
import { actionForKey } from './keyboard';
import {
  TokenCard,
  allConfirmed,
  cardsFromResponse,
  confirm,
  countResolution,
  editGloss,
  emptyCounters,
  feedbackFor,
  nextUnresolved,
  selectRank,
} from './state';
import { renderCard, renderConfusionTable, renderInstruction } from './render';

const serviceUrl =
  new URLSearchParams(window.location.search).get('service') ?? 'http://127.0.0.1:8765';
const api = new ApiClient(serviceUrl);

let cards: TokenCard[] = [];
let activeIndex = 0;
let translation = '';
let counters = emptyCounters();
const annotatorId = `wb-${Math.random().toString(36).slice(2, 8)}`;

const $ = (id: string) => document.getElementById(id)!;

function setBanner(text: string, kind: 'info' | 'error' = 'info') {
  const banner = $('banner');
  banner.textContent = text;
  banner.className = `banner ${kind}` + (text ? '' : ' hidden');
}

function redraw() {
  const host = $('cards');
  host.textContent = '';
  cards.forEach((card, i) => {
    host.appendChild(
      renderCard(card, i === activeIndex, {
        onSelectRank: (pos, rank) => {
          const updated = selectRank(cards[pos], rank);
          if (updated) {
            cards[pos] = updated;
            activeIndex = pos;
            redraw();
          }
        },
        onEdit: (pos, gloss) => {
          const updated = editGloss(cards[pos], gloss);
          if (updated) {
            cards[pos] = updated;
            activeIndex = pos;
            redraw();
          } else if (gloss.trim()) {
            setBanner('a gloss must be a single whitespace-free token', 'error');
          }
        },
        onConfirm: (pos) => void submit(pos),
      }),
    );
  });
  const [r1, r2, r3] = counters.acceptedAtRank;
  $('counters').textContent =
    `accepted @1: ${r1} · @2: ${r2} · @3: ${r3} · manual: ${counters.manualEdits}`;
  $('done').textContent = allConfirmed(cards) ? 'sentence complete' : '';
}

async function submit(pos: number) {
  const card = cards[pos];
  if (card.resolution.state === 'unresolved' || card.confirmed) return;
  try {
    const payload = feedbackFor(cards, card, translation, annotatorId);
    const resp = await api.feedback(payload);
    cards[pos] = confirm(card);
    counters = countResolution(counters, cards[pos]);
    setBanner(`accepted "${payload.acceptedGloss}" · snapshot ${resp.snapshotId.slice(0, 12)}`);
    const next = nextUnresolved(cards, pos);
    if (next >= 0) activeIndex = next;
    redraw();
  } catch (err) {
    if (err instanceof ApiRequestError) {
      setBanner(`feedback rejected: ${err.message}`, 'error');
    } else {
      setBanner('service unreachable; selection kept, retry accept', 'error');
    }
  }
}

async function loadSentence() {
  const sentence = ($('sentence') as HTMLInputElement).value.trim();
  translation = ($('translation') as HTMLInputElement).value.trim();
  if (!sentence) {
    setBanner('enter a sentence to gloss', 'error');
    return;
  }
  setBanner('glossing…');
  try {
    const resp = await api.gloss(sentence.split(/\s+/), translation);
    cards = cardsFromResponse(resp.tokens);
    activeIndex = 0;
    setBanner(`loaded ${cards.length} tokens · snapshot ${resp.snapshotId.slice(0, 12)}`);
    redraw();
  } catch (err) {
    cards = [];
    redraw();
    const detail = err instanceof ApiRequestError ? err.message : 'service unreachable';
    setBanner(`could not gloss: ${detail}`, 'error');
  }
}

async function loadConfusions() {
  const host = $('confusions-host');
  host.textContent = '';
  try {
    const resp = await api.confusions();
    if (!resp.pairs.length) {
      host.appendChild(document.createTextNode(
        'no evaluation runs loaded; start the service with --pred/--gold to populate this table',
      ));
      return;
    }
    host.appendChild(document.createTextNode(summaryLine(resp)));
    host.appendChild(
      renderConfusionTable(toRows(resp.pairs), async (a, b) => {
        setBanner(`writing instructions for ${a} / ${b}…`);
        try {
          const result = await api.generateInstructions(a, b);
          $('instruction-host').textContent = '';
          $('instruction-host').appendChild(renderInstruction(result));
          setBanner('instructions generated');
        } catch (err) {
          const detail = err instanceof ApiRequestError ? err.message : 'service unreachable';
          setBanner(`generation failed: ${detail}`, 'error');
        }
      }),
    );
  } catch {
    host.appendChild(document.createTextNode('confusion data unavailable'));
  }
}

function onKey(event: KeyboardEvent) {
  const target = event.target as HTMLElement | null;
  const action = actionForKey({
    key: event.key,
    shiftKey: event.shiftKey,
    targetIsInput: !!target && (target.tagName === 'INPUT' || target.tagName === 'TEXTAREA'),
  });
  if (action.kind === 'none' || !cards.length) return;
  event.preventDefault();
  if (action.kind === 'accept-rank') {
    const updated = selectRank(cards[activeIndex], action.rank);
    if (updated) {
      cards[activeIndex] = updated;
      void submit(activeIndex);
    }
  } else if (action.kind === 'advance') {
    activeIndex = (activeIndex + 1) % cards.length;
    redraw();
  } else if (action.kind === 'retreat') {
    activeIndex = (activeIndex - 1 + cards.length) % cards.length;
    redraw();
  } else if (action.kind === 'confirm') {
    void submit(activeIndex);
  } else if (action.kind === 'edit') {
    const input = document.querySelector<HTMLInputElement>(
      `.card[data-position="${activeIndex}"] .edit-input`,
    );
    input?.focus();
  }
}

export function start() {
  $('load').addEventListener('click', () => void loadSentence());
  $('refresh-confusions').addEventListener('click', () => void loadConfusions());
  document.addEventListener('keydown', onKey);
  api
    .health()
    .then((h) => setBanner(`connected · ${h.entries} corpus entries · snapshot ${h.snapshotId.slice(0, 12)}`))
    .catch(() => setBanner(`no service at ${serviceUrl}; start one with: glosskit serve`, 'error'));
  void loadConfusions();
}

if (typeof document !== 'undefined' && document.getElementById('load')) {
  start();
}
