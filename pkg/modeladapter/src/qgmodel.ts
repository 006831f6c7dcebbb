/**
 * Sequence-to-sequence question generator trained on the QG training set:
 * input is (document, trigger, role), output is a question, so the model
 * needs no gold answer spans and transfers across corpora.
 *
 * Architecture: mean-pooled input embedding conditions the initial state of
 * an LSTM decoder; trained with teacher forcing and cross-entropy, decoded
 * greedily. The first decoded token skips EOS so generated questions are
 * never empty.
 */

import * as tf from '@tensorflow/tfjs';
import * as fs from 'fs';
import * as path from 'path';

import { QgTrainingExample } from './schemas';
import { EarlyStopping } from './earlystop';
import { TrainSpec, validateTrainSpec } from './trainspec';
import { BOS, EOS, Vocab } from './vocab';

export interface QgModelConfig {
  dim: number;
  hidden: number;
  maxInputLen: number;
  maxOutputLen: number;
}

export const DEFAULT_QG_CONFIG: QgModelConfig = {
  dim: 16,
  hidden: 16,
  maxInputLen: 24,
  maxOutputLen: 12,
};

export function qgInputTokens(example: { document: string; trigger: string; role: string }): string[] {
  return [
    example.role,
    example.trigger,
    '|',
    ...example.document.split(/\s+/),
  ];
}

export class QgModel {
  readonly vocab: Vocab;
  readonly config: QgModelConfig;
  embeddings: tf.Variable;
  stateMapC: tf.Variable;
  stateMapH: tf.Variable;
  lstmKernel: tf.Variable;
  lstmBias: tf.Variable;
  outMap: tf.Variable;
  outBias: tf.Variable;

  constructor(vocab: Vocab, config: QgModelConfig, seed: number) {
    this.vocab = vocab;
    this.config = config;
    const { dim, hidden } = config;
    this.embeddings = tf.variable(
      tf.randomNormal([vocab.size, dim], 0, 0.05, 'float32', seed), true,
    );
    this.stateMapC = tf.variable(
      tf.randomNormal([dim, hidden], 0, 0.05, 'float32', seed + 1), true,
    );
    this.stateMapH = tf.variable(
      tf.randomNormal([dim, hidden], 0, 0.05, 'float32', seed + 2), true,
    );
    this.lstmKernel = tf.variable(
      tf.randomNormal([dim + hidden, 4 * hidden], 0, 0.05, 'float32', seed + 3), true,
    );
    this.lstmBias = tf.variable(tf.zeros([4 * hidden]), true);
    this.outMap = tf.variable(
      tf.randomNormal([hidden, vocab.size], 0, 0.05, 'float32', seed + 4), true,
    );
    this.outBias = tf.variable(tf.zeros([vocab.size]), true);
  }

  private variables(): tf.Variable[] {
    return [
      this.embeddings, this.stateMapC, this.stateMapH,
      this.lstmKernel, this.lstmBias, this.outMap, this.outBias,
    ];
  }

  private encode(inputIds: number[]): { c: tf.Tensor2D; h: tf.Tensor2D } {
    const pooled = tf.mean(tf.gather(this.embeddings, tf.tensor1d(inputIds, 'int32')), 0);
    const row = tf.reshape(pooled, [1, -1]) as tf.Tensor2D;
    return {
      c: tf.tanh(tf.matMul(row, this.stateMapC as unknown as tf.Tensor2D)) as tf.Tensor2D,
      h: tf.tanh(tf.matMul(row, this.stateMapH as unknown as tf.Tensor2D)) as tf.Tensor2D,
    };
  }

  private step(tokenId: number, c: tf.Tensor2D, h: tf.Tensor2D):
      { logits: tf.Tensor1D; c: tf.Tensor2D; h: tf.Tensor2D } {
    const x = tf.reshape(
      tf.gather(this.embeddings, tf.tensor1d([tokenId], 'int32')), [1, -1],
    ) as tf.Tensor2D;
    const [newC, newH] = tf.basicLSTMCell(
      1.0,
      this.lstmKernel as unknown as tf.Tensor2D,
      this.lstmBias as unknown as tf.Tensor1D,
      x, c, h,
    );
    const logits = tf.reshape(
      tf.add(tf.matMul(newH, this.outMap as unknown as tf.Tensor2D), this.outBias), [-1],
    ) as tf.Tensor1D;
    return { logits, c: newC as tf.Tensor2D, h: newH as tf.Tensor2D };
  }

  private exampleLoss(inputIds: number[], targetIds: number[]): tf.Scalar {
    return tf.tidy(() => {
      let { c, h } = this.encode(inputIds);
      const teacher = [BOS, ...targetIds];
      const expected = [...targetIds, EOS];
      let total: tf.Scalar = tf.scalar(0);
      for (let i = 0; i < teacher.length; i++) {
        const out = this.step(teacher[i], c, h);
        c = out.c;
        h = out.h;
        const ce = tf.losses.softmaxCrossEntropy(
          tf.oneHot(tf.tensor1d([expected[i]], 'int32'), this.vocab.size),
          tf.reshape(out.logits, [1, -1]),
        ) as tf.Scalar;
        total = tf.add(total, ce) as tf.Scalar;
      }
      return tf.div(total, tf.scalar(teacher.length)) as tf.Scalar;
    });
  }

  private toPair(example: QgTrainingExample): { inputIds: number[]; targetIds: number[] } {
    return {
      inputIds: this.vocab.encode(qgInputTokens(example.input)).slice(0, this.config.maxInputLen),
      targetIds: this.vocab
        .encode(example.target.split(/\s+/))
        .slice(0, this.config.maxOutputLen),
    };
  }

  train(examples: QgTrainingExample[], spec: TrainSpec): { losses: number[]; stoppedEpoch: number | null } {
    validateTrainSpec(spec);
    const pairs = examples.map((ex) => this.toPair(ex));
    const optimizer = tf.train.adam(spec.learningRate);
    const stopper = new EarlyStopping(spec.patience);
    const losses: number[] = [];
    let stoppedEpoch: number | null = null;
    for (let epoch = 1; epoch <= spec.maxEpochs; epoch++) {
      let total = 0;
      for (const pair of pairs) {
        const loss = optimizer.minimize(
          () => this.exampleLoss(pair.inputIds, pair.targetIds),
          true,
          this.variables(),
        ) as tf.Scalar;
        total += loss.dataSync()[0];
        loss.dispose();
      }
      const epochLoss = total / Math.max(1, pairs.length);
      losses.push(epochLoss);
      if (stopper.update(epochLoss, epoch)) {
        stoppedEpoch = epoch;
        break;
      }
    }
    optimizer.dispose();
    return { losses, stoppedEpoch };
  }

  /** Greedy decode; the first step never emits EOS, so output is non-empty. */
  generate(input: { document: string; trigger: string; role: string }): string {
    return tf.tidy(() => {
      const inputIds = this.vocab.encode(qgInputTokens(input)).slice(0, this.config.maxInputLen);
      let { c, h } = this.encode(inputIds);
      const out: number[] = [];
      let prev = BOS;
      for (let i = 0; i < this.config.maxOutputLen; i++) {
        const stepOut = this.step(prev, c, h);
        c = stepOut.c;
        h = stepOut.h;
        const logits = stepOut.logits.dataSync();
        let best = 0;
        for (let v = 1; v < logits.length; v++) {
          if (logits[v] > logits[best]) {
            best = v;
          }
        }
        if (best === EOS && out.length === 0) {
          let second = 0;
          for (let v = 0; v < logits.length; v++) {
            if (v !== EOS && logits[v] > logits[second]) {
              second = v;
            }
          }
          best = second;
        }
        if (best === EOS) {
          break;
        }
        out.push(best);
        prev = best;
      }
      const words = this.vocab.decode(out);
      return words.length > 0 ? words.join(' ') : this.vocab.tokens[4] ?? 'what';
    });
  }

  save(filePath: string): void {
    const payload = {
      kind: 'qg_checkpoint',
      schema_version: 1,
      config: this.config,
      vocab: this.vocab.toJSON(),
      weights: this.variables().map((v) => Array.from(v.dataSync())),
    };
    fs.mkdirSync(path.dirname(path.resolve(filePath)), { recursive: true });
    const tmp = `${filePath}.tmp.${process.pid}`;
    fs.writeFileSync(tmp, JSON.stringify(payload));
    fs.renameSync(tmp, filePath);
  }

  static load(filePath: string): QgModel {
    const payload = JSON.parse(fs.readFileSync(filePath, 'utf-8'));
    if (payload.kind !== 'qg_checkpoint' || payload.schema_version !== 1) {
      throw new Error(`${filePath}: not a compatible qg checkpoint`);
    }
    const model = new QgModel(new Vocab(payload.vocab), payload.config, 0);
    const ordered = [
      model.embeddings, model.stateMapC, model.stateMapH,
      model.lstmKernel, model.lstmBias, model.outMap, model.outBias,
    ];
    ordered.forEach((variable, i) => {
      variable.assign(tf.tensor(payload.weights[i], variable.shape as number[], 'float32'));
    });
    return model;
  }
}

export function buildQgModel(
  examples: QgTrainingExample[],
  seed: number,
  config: QgModelConfig = DEFAULT_QG_CONFIG,
): QgModel {
  const sequences = examples.flatMap((ex) => [
    qgInputTokens(ex.input),
    ex.target.split(/\s+/),
  ]);
  return new QgModel(Vocab.build(sequences), config, seed);
}
