/** Keyboard-first interaction: digits 1-3 accept a suggestion rank,
 * Tab advances to the next unresolved card, Enter confirms, `e` starts
 * a manual edit. Keys are ignored while typing in an input field. */

export type KeyAction =
  | { kind: 'accept-rank'; rank: number }
  | { kind: 'advance' }
  | { kind: 'retreat' }
  | { kind: 'confirm' }
  | { kind: 'edit' }
  | { kind: 'none' };

export interface KeyStroke {
  key: string;
  shiftKey?: boolean;
  targetIsInput?: boolean;
}

export function actionForKey(stroke: KeyStroke): KeyAction {
  if (stroke.targetIsInput) return { kind: 'none' };
  switch (stroke.key) {
    case '1':
    case '2':
    case '3':
      return { kind: 'accept-rank', rank: Number(stroke.key) };
    case 'Tab':
      return stroke.shiftKey ? { kind: 'retreat' } : { kind: 'advance' };
    case 'Enter':
      return { kind: 'confirm' };
    case 'e':
    case 'E':
      return { kind: 'edit' };
    default:
      return { kind: 'none' };
  }
}
