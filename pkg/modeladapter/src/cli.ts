/**
 * Command-line entry points mirroring the file protocol:
 *
 *   train-qa            qa dataset JSONL -> checkpoint + per-epoch metrics
 *   predict-qa          checkpoint + qa dataset -> PredictionRecord JSONL
 *   train-qg            QG training set JSONL -> checkpoint
 *   generate-questions  checkpoint + qa dataset -> contextualized-question JSONL
 */

import yargs from 'yargs';
import { hideBin } from 'yargs/helpers';

import {
  ContextQuestionEntry,
  readCorpus,
  readOntology,
  readQaDataset,
  readQgTrainingSet,
  triggerText,
  writeContextQuestions,
  writeJsonl,
  writePredictions,
} from './schemas';
import { buildQaModel, QaModel } from './qamodel';
import { buildQgModel, QgModel } from './qgmodel';
import { makeTrainSpec } from './trainspec';

function specFromArgs(argv: Record<string, unknown>) {
  return makeTrainSpec({
    learningRate: argv.learningRate as number,
    dropout: argv.dropout as number,
    seed: argv.seed as number,
    maxEpochs: argv.epochs as number,
    patience: argv.patience as number,
  });
}

const trainOptions = {
  'learning-rate': { type: 'number' as const, default: 5e-5 },
  dropout: { type: 'number' as const, default: 0.1 },
  seed: { type: 'number' as const, default: 42 },
  epochs: { type: 'number' as const, default: 50 },
  patience: { type: 'number' as const, default: 10 },
};

async function main(): Promise<void> {
  await yargs(hideBin(process.argv))
    .command(
      'train-qa',
      'train the extractive QA model on a qa dataset file',
      (y) =>
        y.options({
          data: { type: 'string', demandOption: true },
          dev: { type: 'string' },
          checkpoint: { type: 'string', demandOption: true },
          metrics: { type: 'string' },
          ...trainOptions,
        }),
      (argv) => {
        const instances = readQaDataset(argv.data);
        const dev = argv.dev ? readQaDataset(argv.dev) : null;
        const spec = specFromArgs(argv);
        const model = buildQaModel(instances, spec.seed);
        const result = model.train(instances, spec, dev);
        model.save(argv.checkpoint);
        const metricsPath = argv.metrics ?? `${argv.checkpoint}.metrics.jsonl`;
        writeJsonl(metricsPath, result.metrics);
        const last = result.metrics[result.metrics.length - 1];
        console.log(
          `trained ${result.metrics.length} epoch(s); ` +
            `train F1 ${last.trainF1.toFixed(4)}; ` +
            (result.stoppedEpoch !== null
              ? `early stop at epoch ${result.stoppedEpoch}`
              : 'ran to the epoch cap'),
        );
      },
    )
    .command(
      'predict-qa',
      'emit one PredictionRecord per dataset instance',
      (y) =>
        y.options({
          checkpoint: { type: 'string', demandOption: true },
          data: { type: 'string', demandOption: true },
          out: { type: 'string', demandOption: true },
          'system-id': { type: 'string', default: 'modeladapter-qa' },
        }),
      (argv) => {
        const model = QaModel.load(argv.checkpoint);
        const instances = readQaDataset(argv.data);
        writePredictions(argv.out, model.predict(instances, argv.systemId as string));
        console.log(`wrote ${instances.length} prediction(s) to ${argv.out}`);
      },
    )
    .command(
      'train-qg',
      'train the question generator on a QG training set',
      (y) =>
        y.options({
          data: { type: 'string', demandOption: true },
          checkpoint: { type: 'string', demandOption: true },
          ...trainOptions,
        }),
      (argv) => {
        const examples = readQgTrainingSet(argv.data);
        const spec = specFromArgs(argv);
        const model = buildQgModel(examples, spec.seed);
        const result = model.train(examples, spec);
        model.save(argv.checkpoint);
        console.log(
          `trained ${result.losses.length} epoch(s); final loss ${result.losses.at(-1)?.toFixed(4)}`,
        );
      },
    )
    .command(
      'generate-questions',
      'generate contextualized questions for every (document, event, role) of a corpus',
      (y) =>
        y.options({
          checkpoint: { type: 'string', demandOption: true },
          corpus: { type: 'string', demandOption: true },
          ontology: { type: 'string', demandOption: true },
          out: { type: 'string', demandOption: true },
          'per-role': { type: 'number', default: 1 },
        }),
      (argv) => {
        const model = QgModel.load(argv.checkpoint);
        const docs = readCorpus(argv.corpus);
        const ontology = readOntology(argv.ontology);
        const entries: ContextQuestionEntry[] = [];
        for (const doc of docs) {
          doc.events.forEach((event, eventIndex) => {
            const roles = ontology[event.event_type];
            if (!roles) {
              throw new Error(`event type '${event.event_type}' not in ontology`);
            }
            for (const role of roles) {
              const question = model.generate({
                document: doc.tokens.join(' '),
                trigger: triggerText(doc, event),
                role,
              });
              const count = Math.max(1, Math.min(5, argv.perRole as number));
              entries.push({
                doc_id: doc.doc_id,
                event_index: eventIndex,
                role,
                questions: Array.from({ length: count }, () => question),
              });
            }
          });
        }
        writeContextQuestions(argv.out, entries);
        console.log(`wrote questions for ${entries.length} key(s) to ${argv.out}`);
      },
    )
    .demandCommand(1)
    .strict()
    .parseAsync();
}

main().catch((error) => {
  console.error(error instanceof Error ? error.message : error);
  process.exitCode = 1;
});
