// Minimal 5x7 bitmap font so text labels rasterize deterministically without
// a canvas. Lowercase folds to uppercase; unknown characters render as a box.

const GLYPHS: Record<string, string[]> = {
  A: [".XX.", "X..X", "X..X", "XXXX", "X..X", "X..X", "X..X"],
  B: ["XXX.", "X..X", "X..X", "XXX.", "X..X", "X..X", "XXX."],
  C: [".XXX", "X...", "X...", "X...", "X...", "X...", ".XXX"],
  D: ["XXX.", "X..X", "X..X", "X..X", "X..X", "X..X", "XXX."],
  E: ["XXXX", "X...", "X...", "XXX.", "X...", "X...", "XXXX"],
  F: ["XXXX", "X...", "X...", "XXX.", "X...", "X...", "X..."],
  G: [".XXX", "X...", "X...", "X.XX", "X..X", "X..X", ".XX."],
  H: ["X..X", "X..X", "X..X", "XXXX", "X..X", "X..X", "X..X"],
  I: ["XXX", ".X.", ".X.", ".X.", ".X.", ".X.", "XXX"],
  J: ["..XX", "...X", "...X", "...X", "...X", "X..X", ".XX."],
  K: ["X..X", "X.X.", "XX..", "X...", "XX..", "X.X.", "X..X"],
  L: ["X...", "X...", "X...", "X...", "X...", "X...", "XXXX"],
  M: ["X...X", "XX.XX", "X.X.X", "X.X.X", "X...X", "X...X", "X...X"],
  N: ["X..X", "XX.X", "X.XX", "X..X", "X..X", "X..X", "X..X"],
  O: [".XX.", "X..X", "X..X", "X..X", "X..X", "X..X", ".XX."],
  P: ["XXX.", "X..X", "X..X", "XXX.", "X...", "X...", "X..."],
  Q: [".XX.", "X..X", "X..X", "X..X", "X.XX", "X.X.", ".X.X"],
  R: ["XXX.", "X..X", "X..X", "XXX.", "XX..", "X.X.", "X..X"],
  S: [".XXX", "X...", "X...", ".XX.", "...X", "...X", "XXX."],
  T: ["XXXXX", "..X..", "..X..", "..X..", "..X..", "..X..", "..X.."],
  U: ["X..X", "X..X", "X..X", "X..X", "X..X", "X..X", ".XX."],
  V: ["X...X", "X...X", "X...X", "X...X", ".X.X.", ".X.X.", "..X.."],
  W: ["X...X", "X...X", "X...X", "X.X.X", "X.X.X", "XX.XX", "X...X"],
  X: ["X...X", ".X.X.", "..X..", "..X..", "..X..", ".X.X.", "X...X"],
  Y: ["X...X", ".X.X.", "..X..", "..X..", "..X..", "..X..", "..X.."],
  Z: ["XXXX", "...X", "..X.", ".X..", "X...", "X...", "XXXX"],
  "0": [".XX.", "X..X", "X.XX", "XX.X", "X..X", "X..X", ".XX."],
  "1": [".X.", "XX.", ".X.", ".X.", ".X.", ".X.", "XXX"],
  "2": [".XX.", "X..X", "...X", "..X.", ".X..", "X...", "XXXX"],
  "3": ["XXX.", "...X", "...X", ".XX.", "...X", "...X", "XXX."],
  "4": ["X..X", "X..X", "X..X", "XXXX", "...X", "...X", "...X"],
  "5": ["XXXX", "X...", "XXX.", "...X", "...X", "X..X", ".XX."],
  "6": [".XX.", "X...", "XXX.", "X..X", "X..X", "X..X", ".XX."],
  "7": ["XXXX", "...X", "..X.", "..X.", ".X..", ".X..", ".X.."],
  "8": [".XX.", "X..X", "X..X", ".XX.", "X..X", "X..X", ".XX."],
  "9": [".XX.", "X..X", "X..X", ".XXX", "...X", "...X", ".XX."],
  " ": ["...", "...", "...", "...", "...", "...", "..."],
  ".": ["..", "..", "..", "..", "..", "XX", "XX"],
  ",": ["..", "..", "..", "..", ".X", ".X", "X."],
  "!": ["X", "X", "X", "X", "X", ".", "X"],
  "?": [".XX.", "X..X", "...X", "..X.", ".X..", "....", ".X.."],
  "-": ["....", "....", "....", "XXXX", "....", "....", "...."],
  ":": [".", "X", ".", ".", ".", "X", "."],
  "'": ["X", "X", ".", ".", ".", ".", "."],
};

const FALLBACK = ["XXXX", "X..X", "X..X", "X..X", "X..X", "X..X", "XXXX"];

export const GLYPH_HEIGHT = 7;

export function glyphFor(character: string): string[] {
  return GLYPHS[character.toUpperCase()] ?? FALLBACK;
}

export function glyphWidth(character: string): number {
  return glyphFor(character)[0].length;
}

/** Pixel width of a rendered string at scale 1 (1px spacing between glyphs). */
export function textWidth(text: string): number {
  let width = 0;
  for (const character of text) width += glyphWidth(character) + 1;
  return Math.max(0, width - 1);
}
