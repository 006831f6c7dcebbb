/** Training hyperparameters, restricted to the tuning grids. */

export const LEARNING_RATE_GRID = [1e-5, 2e-5, 3e-5, 4e-5, 5e-5];
export const DROPOUT_GRID = [0.1, 0.2, 0.3];
export const INITIAL_SEED = 42;
export const RETRAIN_SEEDS = [4, 13, 52, 57];
export const MAX_EPOCHS = 50;
export const PATIENCE = 10;

export interface TrainSpec {
  learningRate: number;
  dropout: number;
  seed: number;
  maxEpochs: number;
  patience: number;
}

export function makeTrainSpec(overrides: Partial<TrainSpec> = {}): TrainSpec {
  const spec: TrainSpec = {
    learningRate: LEARNING_RATE_GRID[4],
    dropout: DROPOUT_GRID[0],
    seed: INITIAL_SEED,
    maxEpochs: MAX_EPOCHS,
    patience: PATIENCE,
    ...overrides,
  };
  validateTrainSpec(spec);
  return spec;
}

export function validateTrainSpec(spec: TrainSpec): void {
  if (!LEARNING_RATE_GRID.includes(spec.learningRate)) {
    throw new Error(
      `learning rate ${spec.learningRate} not in grid [${LEARNING_RATE_GRID.join(', ')}]`,
    );
  }
  if (!DROPOUT_GRID.includes(spec.dropout)) {
    throw new Error(`dropout ${spec.dropout} not in grid [${DROPOUT_GRID.join(', ')}]`);
  }
  if (spec.maxEpochs < 1 || spec.maxEpochs > MAX_EPOCHS) {
    throw new Error(`maxEpochs must be in 1..${MAX_EPOCHS}, got ${spec.maxEpochs}`);
  }
  if (spec.patience < 1) {
    throw new Error(`patience must be >= 1, got ${spec.patience}`);
  }
}

/** mean and population standard deviation, for multi-seed reporting */
export function meanStd(values: number[]): { mean: number; std: number } {
  if (values.length === 0) {
    return { mean: 0, std: 0 };
  }
  const mean = values.reduce((a, b) => a + b, 0) / values.length;
  const variance = values.reduce((a, b) => a + (b - mean) ** 2, 0) / values.length;
  return { mean, std: Math.sqrt(variance) };
}

export interface SweepResult {
  bestLearningRate: number;
  bestDropout: number;
  bestDevScore: number;
  seeds: number[];
  scores: number[];
  mean: number;
  std: number;
}

/**
 * Grid-search learning rate and dropout on a dev score, then retrain with
 * the initial seed plus the four retrain seeds and report mean +- std of
 * the five runs. The trainer callback hides the actual model.
 */
export function tuneAndRetrain(
  trainer: (spec: TrainSpec) => number,
  base: Partial<TrainSpec> = {},
): SweepResult {
  let best: { lr: number; dropout: number; score: number } | null = null;
  for (const lr of LEARNING_RATE_GRID) {
    for (const dropout of DROPOUT_GRID) {
      const score = trainer(makeTrainSpec({ ...base, learningRate: lr, dropout, seed: INITIAL_SEED }));
      if (best === null || score > best.score) {
        best = { lr, dropout, score };
      }
    }
  }
  if (best === null) {
    throw new Error('empty hyperparameter grid');
  }
  const seeds = [INITIAL_SEED, ...RETRAIN_SEEDS];
  const scores = seeds.map((seed) =>
    trainer(makeTrainSpec({ ...base, learningRate: best!.lr, dropout: best!.dropout, seed })),
  );
  const { mean, std } = meanStd(scores);
  return {
    bestLearningRate: best.lr,
    bestDropout: best.dropout,
    bestDevScore: best.score,
    seeds,
    scores,
    mean,
    std,
  };
}
