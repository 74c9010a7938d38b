// Deterministic PRNG so flattening is reproducible for a fixed seed.

/** mulberry32: small fast 32-bit generator with good enough statistics. */
export function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/** Standard-normal generator via Box-Muller over a mulberry32 stream. */
export function gaussian(seed: number): () => number {
  const uniform = mulberry32(seed);
  let spare: number | null = null;
  return () => {
    if (spare !== null) {
      const value = spare;
      spare = null;
      return value;
    }
    let u = 0;
    while (u === 0) u = uniform();
    const v = uniform();
    const radius = Math.sqrt(-2.0 * Math.log(u));
    spare = radius * Math.sin(2.0 * Math.PI * v);
    return radius * Math.cos(2.0 * Math.PI * v);
  };
}
