/**
 * Extractive QA head over (question, context) token pairs.
 *
 * Token embeddings encode the question (mean pooled); each context
 * position scores against a bilinear map of the question vector, plus a
 * learned absolute-position prior; one extra virtual position represents
 * abstention. Start and end offsets are trained with cross-entropy against
 * the gold offsets (or the virtual position for no-answer instances).
 * Deterministic given the seed: initializers are seeded and training runs
 * single-threaded on the CPU backend.
 */

import * as tf from '@tensorflow/tfjs';
import * as fs from 'fs';
import * as path from 'path';

import { QaInstance, PredictionRecord, Span } from './schemas';
import { EarlyStopping } from './earlystop';
import { TrainSpec, validateTrainSpec } from './trainspec';
import { Vocab } from './vocab';

export interface QaModelConfig {
  dim: number;
  maxContextLen: number;
}

export const DEFAULT_QA_CONFIG: QaModelConfig = { dim: 16, maxContextLen: 24 };

export interface EpochMetrics {
  epoch: number;
  loss: number;
  devLoss: number;
  trainF1: number;
}

export interface TrainResult {
  metrics: EpochMetrics[];
  stoppedEpoch: number | null;
}

interface Example {
  contextIds: number[];
  questionIds: number[];
  start: number; // virtual position (context length slot) encodes no-answer
  end: number;
  instance: QaInstance;
}

export class QaModel {
  readonly vocab: Vocab;
  readonly config: QaModelConfig;
  embeddings: tf.Variable;
  startMap: tf.Variable;
  endMap: tf.Variable;
  startBias: tf.Variable;
  endBias: tf.Variable;

  constructor(vocab: Vocab, config: QaModelConfig, seed: number) {
    this.vocab = vocab;
    this.config = config;
    const { dim, maxContextLen } = config;
    // small init keeps initial logits near zero so the training signal,
    // not initializer noise, decides the argmax
    this.embeddings = tf.variable(
      tf.randomNormal([vocab.size, dim], 0, 0.01, 'float32', seed), true,
    );
    this.startMap = tf.variable(
      tf.randomNormal([dim, dim], 0, 0.01, 'float32', seed + 1), true,
    );
    this.endMap = tf.variable(
      tf.randomNormal([dim, dim], 0, 0.01, 'float32', seed + 2), true,
    );
    this.startBias = tf.variable(tf.zeros([maxContextLen + 1]), true);
    this.endBias = tf.variable(tf.zeros([maxContextLen + 1]), true);
  }

  private variables(): tf.Variable[] {
    return [this.embeddings, this.startMap, this.endMap, this.startBias, this.endBias];
  }

  /** start and end logits over context positions plus the virtual slot */
  logits(contextIds: number[], questionIds: number[], dropout = 0, seed = 0):
      { start: tf.Tensor1D; end: tf.Tensor1D } {
    return tf.tidy(() => {
      const ctx = tf.gather(this.embeddings, tf.tensor1d(contextIds, 'int32'));
      const q = tf.mean(tf.gather(this.embeddings, tf.tensor1d(questionIds, 'int32')), 0);
      const h = dropout > 0 ? tf.dropout(ctx, dropout, undefined, seed) : ctx;
      const len = contextIds.length;
      const out: { start?: tf.Tensor1D; end?: tf.Tensor1D } = {};
      for (const side of ['start', 'end'] as const) {
        const map = side === 'start' ? this.startMap : this.endMap;
        const bias = side === 'start' ? this.startBias : this.endBias;
        const key = tf.reshape(tf.matMul(tf.reshape(q, [1, -1]), map), [-1]);
        const content = tf.reshape(tf.matMul(h, tf.reshape(key, [-1, 1])), [-1]);
        const positional = tf.slice(bias, [0], [len]);
        const virtual = tf.slice(bias, [this.config.maxContextLen], [1]);
        out[side] = tf.concat([tf.add(content, positional), virtual]) as tf.Tensor1D;
      }
      return { start: out.start!, end: out.end! };
    });
  }

  private exampleLoss(ex: Example, dropout: number, seed: number): tf.Scalar {
    return tf.tidy(() => {
      const { start, end } = this.logits(ex.contextIds, ex.questionIds, dropout, seed);
      const n = ex.contextIds.length + 1;
      const lossStart = tf.losses.softmaxCrossEntropy(
        tf.oneHot(tf.tensor1d([ex.start], 'int32'), n), tf.reshape(start, [1, n]),
      );
      const lossEnd = tf.losses.softmaxCrossEntropy(
        tf.oneHot(tf.tensor1d([ex.end], 'int32'), n), tf.reshape(end, [1, n]),
      );
      return tf.add(lossStart, lossEnd) as tf.Scalar;
    });
  }

  private toExample(inst: QaInstance): Example {
    const contextIds = this.vocab
      .encode(inst.context_tokens)
      .slice(0, this.config.maxContextLen);
    const len = contextIds.length;
    let start = len; // virtual position
    let end = len;
    if (inst.answer !== null && inst.answer.end < len) {
      start = inst.answer.start;
      end = inst.answer.end;
    }
    return {
      contextIds,
      questionIds: this.vocab.encode(inst.question.split(/\s+/)),
      start,
      end,
      instance: inst,
    };
  }

  train(
    instances: QaInstance[],
    spec: TrainSpec,
    devInstances: QaInstance[] | null = null,
  ): TrainResult {
    validateTrainSpec(spec);
    const examples = instances.map((inst) => this.toExample(inst));
    const dev = (devInstances ?? instances).map((inst) => this.toExample(inst));
    const optimizer = tf.train.adam(spec.learningRate);
    const stopper = new EarlyStopping(spec.patience);
    const metrics: EpochMetrics[] = [];
    let stoppedEpoch: number | null = null;
    for (let epoch = 1; epoch <= spec.maxEpochs; epoch++) {
      let total = 0;
      examples.forEach((ex, step) => {
        const loss = optimizer.minimize(
          () => this.exampleLoss(ex, spec.dropout, spec.seed + epoch * 10_007 + step),
          true,
          this.variables(),
        ) as tf.Scalar;
        total += loss.dataSync()[0];
        loss.dispose();
      });
      const devLoss = dev.reduce(
        (acc, ex) => acc + tf.tidy(() => this.exampleLoss(ex, 0, 0).dataSync()[0]), 0,
      ) / Math.max(1, dev.length);
      const trainF1 = this.evaluate(instances).f1;
      metrics.push({ epoch, loss: total / Math.max(1, examples.length), devLoss, trainF1 });
      if (stopper.update(devLoss, epoch)) {
        stoppedEpoch = epoch;
        break;
      }
    }
    optimizer.dispose();
    return { metrics, stoppedEpoch };
  }

  predictSpan(inst: QaInstance): Span | null {
    const ex = this.toExample(inst);
    const picked = tf.tidy(() => {
      const { start, end } = this.logits(ex.contextIds, ex.questionIds);
      const len = ex.contextIds.length;
      const startIdx = tf.argMax(start).dataSync()[0];
      if (startIdx >= len) {
        return [-1, -1]; // virtual position: abstain
      }
      const endLogits = end.dataSync();
      let best = startIdx;
      for (let i = startIdx; i < Math.min(len, startIdx + 5); i++) {
        if (endLogits[i] > endLogits[best]) {
          best = i;
        }
      }
      return [startIdx, best];
    });
    return picked[0] < 0 ? null : { start: picked[0], end: picked[1] };
  }

  predict(instances: QaInstance[], systemId = 'modeladapter-qa'): PredictionRecord[] {
    return instances.map((inst) => {
      const span = this.predictSpan(inst);
      return {
        doc_id: inst.doc_id,
        event_index: inst.event_index,
        role: inst.role,
        span,
        text: span === null
          ? undefined
          : inst.context_tokens.slice(span.start, span.end + 1).join(' '),
        system_id: systemId,
      };
    });
  }

  /** strict span match against the dataset's own gold answers */
  evaluate(instances: QaInstance[]): { predicted: number; gold: number; correct: number; f1: number } {
    let predicted = 0;
    let gold = 0;
    let correct = 0;
    for (const inst of instances) {
      const span = this.predictSpan(inst);
      if (inst.answer !== null) {
        gold += 1;
      }
      if (span !== null) {
        predicted += 1;
        if (inst.answer !== null && span.start === inst.answer.start && span.end === inst.answer.end) {
          correct += 1;
        }
      }
    }
    const p = predicted ? correct / predicted : 0;
    const r = gold ? correct / gold : 0;
    const f1 = p + r ? (2 * p * r) / (p + r) : 0;
    return { predicted, gold, correct, f1 };
  }

  save(filePath: string): void {
    const payload = {
      kind: 'qa_checkpoint',
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

  static load(filePath: string): QaModel {
    const payload = JSON.parse(fs.readFileSync(filePath, 'utf-8'));
    if (payload.kind !== 'qa_checkpoint' || payload.schema_version !== 1) {
      throw new Error(`${filePath}: not a compatible qa checkpoint`);
    }
    const model = new QaModel(new Vocab(payload.vocab), payload.config, 0);
    const ordered = [
      model.embeddings, model.startMap, model.endMap, model.startBias, model.endBias,
    ];
    ordered.forEach((variable, i) => {
      variable.assign(tf.tensor(payload.weights[i], variable.shape as number[], 'float32'));
    });
    return model;
  }
}

export function buildQaModel(
  instances: QaInstance[],
  seed: number,
  config: QaModelConfig = DEFAULT_QA_CONFIG,
): QaModel {
  const sequences = instances.flatMap((inst) => [
    inst.context_tokens,
    inst.question.split(/\s+/),
  ]);
  return new QaModel(Vocab.build(sequences), config, seed);
}
