import { describe, expect, it } from 'vitest';

import { summaryLine, toRows } from '../src/confusions';
import type { ConfusionsResponse } from '../src/types';

// Mirrors the published Tsez error-category table shape.
const TABLE_SHAPED: ConfusionsResponse = {
  schemaVersion: 1,
  pairs: [
    { a: 'II-PFV.CVB', b: 'II-PST.UNW', count: 21 },
    { a: 'PFV.CVB', b: 'PST.UNW', count: 107 },
    { a: 'III-PFV.CVB', b: 'III-PST.UNW', count: 22 },
    { a: 'I.PL-PFV.CVB', b: 'III-PFV.CVB', count: 20 },
    { a: 'IV-PFV.CVB', b: 'IV-PST.UNW', count: 18 },
  ],
  tokenErrors: 405,
  aggregates: { CVB: 405 },
};

describe('toRows', () => {
  it('puts the {PFV.CVB, PST.UNW} pair on top when sorted by count', () => {
    const rows = toRows(TABLE_SHAPED.pairs);
    expect(rows[0]).toEqual({
      label: 'PFV.CVB / PST.UNW',
      a: 'PFV.CVB',
      b: 'PST.UNW',
      count: 107,
    });
    expect(rows.map((r) => r.count)).toEqual([107, 22, 21, 20, 18]);
  });

  it('supports alphabetical sorting', () => {
    const rows = toRows(TABLE_SHAPED.pairs, 'pair');
    const labels = rows.map((r) => r.label);
    expect([...labels].sort((a, b) => a.localeCompare(b))).toEqual(labels);
  });

  it('renders empty signatures as (none)', () => {
    const rows = toRows([{ a: '', b: 'ERG', count: 2 }]);
    expect(rows[0].label).toBe('(none) / ERG');
  });

  it('empty input gives an empty table', () => {
    expect(toRows([])).toEqual([]);
  });
});

describe('summaryLine', () => {
  it('reports token errors and the CVB aggregate', () => {
    expect(summaryLine(TABLE_SHAPED)).toBe('405 mislabeled tokens · CVB / any: 405');
  });

  it('omits the aggregate when absent', () => {
    expect(
      summaryLine({ schemaVersion: 1, pairs: [], tokenErrors: 0, aggregates: {} }),
    ).toBe('0 mislabeled tokens');
  });
});
