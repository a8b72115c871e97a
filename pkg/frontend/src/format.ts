// Display formatting. The exact served value always rides along (cell
// tooltips), so nothing shown is ever more precise than what was computed.

export function exact(value: number | null): string {
  return value === null ? "" : String(value);
}

export function pct(value: number | null, digits = 2): string {
  if (value === null) return "–";
  return `${(value * 100).toFixed(digits)}%`;
}

export function pts(value: number | null, digits = 2): string {
  if (value === null) return "–";
  return value.toFixed(digits);
}

export function signed(value: number | null, digits = 2): string {
  if (value === null) return "–";
  const text = value.toFixed(digits);
  return value > 0 ? `+${text}` : text;
}
