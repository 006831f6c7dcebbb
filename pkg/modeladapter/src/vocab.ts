/** Whitespace-token vocabulary with reserved ids for padding/unknown/eos. */

export const PAD = 0;
export const UNK = 1;
export const BOS = 2;
export const EOS = 3;
export const RESERVED = ['<pad>', '<unk>', '<bos>', '<eos>'];

export class Vocab {
  readonly tokens: string[];
  private index: Map<string, number>;

  constructor(tokens: string[]) {
    this.tokens = tokens;
    this.index = new Map(tokens.map((t, i) => [t, i]));
  }

  static build(sequences: string[][], maxSize = 2000): Vocab {
    const counts = new Map<string, number>();
    for (const seq of sequences) {
      for (const token of seq) {
        counts.set(token, (counts.get(token) ?? 0) + 1);
      }
    }
    const ranked = [...counts.entries()]
      .sort((a, b) => b[1] - a[1] || a[0].localeCompare(b[0]))
      .slice(0, maxSize - RESERVED.length)
      .map(([token]) => token);
    return new Vocab([...RESERVED, ...ranked]);
  }

  get size(): number {
    return this.tokens.length;
  }

  encode(tokens: string[]): number[] {
    return tokens.map((t) => this.index.get(t) ?? UNK);
  }

  decode(ids: number[]): string[] {
    return ids
      .filter((id) => id >= RESERVED.length)
      .map((id) => this.tokens[id] ?? '<unk>');
  }

  toJSON(): string[] {
    return this.tokens;
  }
}
