/** Confusion dashboard shaping: sortable signature-pair rows. */

import type { ConfusionPair, ConfusionsResponse } from './types';

export type SortKey = 'count' | 'pair';

export interface ConfusionRow {
  label: string;
  a: string;
  b: string;
  count: number;
}

export function toRows(pairs: ConfusionPair[], sort: SortKey = 'count'): ConfusionRow[] {
  const rows = pairs.map((p) => ({
    label: `${p.a || '(none)'} / ${p.b || '(none)'}`,
    a: p.a,
    b: p.b,
    count: p.count,
  }));
  if (sort === 'count') {
    rows.sort((x, y) => y.count - x.count || x.label.localeCompare(y.label));
  } else {
    rows.sort((x, y) => x.label.localeCompare(y.label));
  }
  return rows;
}

export function summaryLine(response: ConfusionsResponse): string {
  const cvb = response.aggregates['CVB'];
  const parts = [`${response.tokenErrors} mislabeled tokens`];
  if (cvb !== undefined) parts.push(`CVB / any: ${cvb}`);
  return parts.join(' · ');
}
