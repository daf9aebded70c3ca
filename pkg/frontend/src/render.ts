/** DOM construction for token cards, evidence panels, and the confusion
 * dashboard. Pure builders: they return elements, callers attach them. */

import type { ConfusionRow } from './confusions';
import type { TokenCard } from './state';
import type { InstructionResponse, TokenEvidence } from './types';

export const MACHINE_MARK = '🤖 machine-generated';

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function machineBadge(): HTMLElement {
  return el('span', 'machine-badge', MACHINE_MARK);
}

export function renderEvidence(evidence: TokenEvidence): HTMLElement {
  const panel = el('div', 'evidence');
  if (evidence.distribution.length) {
    const dist = el('div', 'evidence-section');
    dist.appendChild(el('h4', undefined, 'Training distribution'));
    const list = el('ul');
    for (const [gloss, pct] of evidence.distribution) {
      list.appendChild(el('li', undefined, `${gloss} (${pct}%)`));
    }
    dist.appendChild(list);
    panel.appendChild(dist);
  }
  const sections: [string, typeof evidence.exactExamples][] = [
    ['Exact matches', evidence.exactExamples],
    ['Approximate matches', evidence.approximateExamples],
  ];
  for (const [title, examples] of sections) {
    if (!examples.length) continue;
    const section = el('div', 'evidence-section');
    section.appendChild(el('h4', undefined, title));
    for (const ex of examples) {
      const block = el('div', 'example');
      block.appendChild(el('div', 'example-sentence', ex.sentence));
      block.appendChild(el('div', 'example-gloss', ex.gloss));
      block.appendChild(el('div', 'example-translation', ex.translation));
      section.appendChild(block);
    }
    panel.appendChild(section);
  }
  if (evidence.reverse.length) {
    const section = el('div', 'evidence-section');
    section.appendChild(el('h4', undefined, 'Translation word lookups'));
    for (const line of evidence.reverse) {
      const items = line.items.map(([tok, gloss]) => `${tok} (${gloss})`).join(', ');
      section.appendChild(el('div', 'reverse-line', `"${line.word}": ${items}`));
    }
    panel.appendChild(section);
  }
  return panel;
}

export interface CardHandlers {
  onSelectRank: (position: number, rank: number) => void;
  onEdit: (position: number, gloss: string) => void;
  onConfirm: (position: number) => void;
}

export function renderCard(card: TokenCard, active: boolean, handlers: CardHandlers): HTMLElement {
  const root = el('div', 'card' + (active ? ' active' : '') + (card.confirmed ? ' confirmed' : ''));
  root.dataset.position = String(card.position);

  const head = el('div', 'card-head');
  head.appendChild(el('span', 'card-word', card.word));
  head.appendChild(machineBadge());
  if (card.injectedPair) {
    head.appendChild(
      el('span', 'injected-badge', `instructions: ${card.injectedPair[0]} / ${card.injectedPair[1]}`),
    );
  }
  root.appendChild(head);

  const list = el('div', 'suggestions');
  card.suggestions.forEach((gloss, i) => {
    const rank = i + 1;
    const btn = el('button', 'suggestion', gloss);
    btn.prepend(el('span', 'rank-badge', String(rank)));
    const picked =
      card.resolution.state === 'suggestion' && card.resolution.rank === rank;
    if (picked) btn.classList.add('selected');
    btn.disabled = card.confirmed;
    btn.addEventListener('click', () => handlers.onSelectRank(card.position, rank));
    list.appendChild(btn);
  });
  root.appendChild(list);

  const editRow = el('div', 'edit-row');
  const input = el('input', 'edit-input');
  input.placeholder = 'manual gloss (no spaces)';
  if (card.resolution.state === 'manual') input.value = card.resolution.gloss;
  input.disabled = card.confirmed;
  input.addEventListener('change', () => handlers.onEdit(card.position, input.value));
  editRow.appendChild(input);
  const confirmBtn = el('button', 'confirm-btn', card.confirmed ? 'accepted' : 'accept');
  confirmBtn.disabled = card.confirmed || card.resolution.state === 'unresolved';
  confirmBtn.addEventListener('click', () => handlers.onConfirm(card.position));
  editRow.appendChild(confirmBtn);
  root.appendChild(editRow);

  const details = el('details');
  details.appendChild(el('summary', undefined, 'evidence'));
  details.appendChild(renderEvidence(card.evidence));
  root.appendChild(details);
  return root;
}

export function renderConfusionTable(
  rows: ConfusionRow[],
  onGenerate: (a: string, b: string) => void,
): HTMLElement {
  const table = el('table', 'confusions');
  const head = el('tr');
  head.appendChild(el('th', undefined, 'confusion'));
  head.appendChild(el('th', undefined, 'count'));
  head.appendChild(el('th', undefined, ''));
  table.appendChild(head);
  for (const row of rows) {
    const tr = el('tr');
    tr.appendChild(el('td', undefined, row.label));
    tr.appendChild(el('td', 'count-cell', String(row.count)));
    const actions = el('td');
    const btn = el('button', 'generate-btn', 'write instructions');
    btn.addEventListener('click', () => onGenerate(row.a, row.b));
    actions.appendChild(btn);
    tr.appendChild(actions);
    table.appendChild(tr);
  }
  return table;
}

export function renderInstruction(result: InstructionResponse): HTMLElement {
  const panel = el('div', 'instruction-panel');
  const head = el('div', 'instruction-head');
  head.appendChild(el('strong', undefined, `${result.pair[0]} / ${result.pair[1]}`));
  head.appendChild(machineBadge());
  panel.appendChild(head);
  panel.appendChild(el('pre', 'instruction-text', result.text));
  panel.appendChild(
    el(
      'div',
      'provenance',
      `model ${result.model} · temperature ${result.temperature} · ${result.instanceCount} instances · ${result.createdAt}`,
    ),
  );
  return panel;
}
