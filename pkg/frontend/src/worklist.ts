/**
 * Ordered lesion worklist with an optional seeded shuffle, so a reading
 * session can present cases in randomized order reproducibly.
 */

export interface WorklistEntry {
  path: string;
  lesionId?: string;
}

function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export class Worklist {
  private entries: WorklistEntry[];
  private cursor = 0;

  constructor(entries: WorklistEntry[], options: { shuffleSeed?: number } = {}) {
    this.entries = entries.slice();
    if (options.shuffleSeed !== undefined) {
      const rand = mulberry32(options.shuffleSeed);
      for (let i = this.entries.length - 1; i > 0; i--) {
        const j = Math.floor(rand() * (i + 1));
        [this.entries[i], this.entries[j]] = [this.entries[j], this.entries[i]];
      }
    }
  }

  get length(): number {
    return this.entries.length;
  }

  get remaining(): number {
    return this.entries.length - this.cursor;
  }

  order(): string[] {
    return this.entries.map((e) => e.path);
  }

  next(): WorklistEntry | null {
    if (this.cursor >= this.entries.length) return null;
    return this.entries[this.cursor++];
  }
}
