/** Minimal PGM (P2/P5, maxval 255) decoder for displaying server images. */

export interface PgmImage {
  width: number;
  height: number;
  pixels: Uint8Array; // row-major
}

export function decodePgm(data: Uint8Array): PgmImage {
  const tokens: Array<{ start: number; text: string }> = [];
  let i = 0;
  // header needs four tokens: magic, width, height, maxval
  while (i < data.length && tokens.length < 4) {
    const c = data[i];
    if (c === 0x23) {
      // '#' comment to end of line
      while (i < data.length && data[i] !== 0x0a) i++;
    } else if (c === 0x20 || c === 0x09 || c === 0x0a || c === 0x0d) {
      i++;
    } else {
      const start = i;
      while (i < data.length && !isSpaceOrHash(data[i])) i++;
      tokens.push({ start, text: asciiSlice(data, start, i) });
    }
  }
  if (tokens.length < 4) throw new Error("truncated PGM header");
  const [magic, w, h, maxval] = tokens;
  const width = parseInt(w.text, 10);
  const height = parseInt(h.text, 10);
  if (!(width > 0 && height > 0)) throw new Error("bad PGM dimensions");
  if (parseInt(maxval.text, 10) !== 255) throw new Error("PGM maxval must be 255");

  const pixels = new Uint8Array(width * height);
  if (magic.text === "P5") {
    const start = maxval.start + maxval.text.length + 1;
    if (data.length < start + width * height) throw new Error("truncated P5 data");
    pixels.set(data.subarray(start, start + width * height));
  } else if (magic.text === "P2") {
    const body = asciiSlice(data, maxval.start + maxval.text.length, data.length);
    const values = body.split(/\s+/).filter((t) => t.length > 0);
    if (values.length !== width * height) throw new Error("truncated P2 data");
    for (let k = 0; k < values.length; k++) pixels[k] = parseInt(values[k], 10);
  } else {
    throw new Error(`unsupported PGM magic ${magic.text}`);
  }
  return { width, height, pixels };
}

function isSpaceOrHash(c: number): boolean {
  return c === 0x20 || c === 0x09 || c === 0x0a || c === 0x0d || c === 0x23;
}

function asciiSlice(data: Uint8Array, start: number, end: number): string {
  let out = "";
  for (let k = start; k < end; k++) out += String.fromCharCode(data[k]);
  return out;
}

/** Expand grayscale to RGBA for putImageData-style consumers. */
export function toRgba(img: PgmImage): Uint8ClampedArray {
  const rgba = new Uint8ClampedArray(img.width * img.height * 4);
  for (let k = 0; k < img.pixels.length; k++) {
    const v = img.pixels[k];
    rgba[4 * k] = v;
    rgba[4 * k + 1] = v;
    rgba[4 * k + 2] = v;
    rgba[4 * k + 3] = 255;
  }
  return rgba;
}
