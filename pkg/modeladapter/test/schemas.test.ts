import * as fs from 'fs';
import * as os from 'os';
import * as path from 'path';

import { afterEach, beforeEach, describe, expect, it } from 'vitest';

import {
  readCorpus,
  readQaDataset,
  readQgTrainingSet,
  writeContextQuestions,
  writeJsonl,
  writePredictions,
} from '../src/schemas';

let dir: string;

beforeEach(() => {
  dir = fs.mkdtempSync(path.join(os.tmpdir(), 'adapter-schemas-'));
});

afterEach(() => {
  fs.rmSync(dir, { recursive: true, force: true });
});

describe('qa dataset reader', () => {
  it('requires the header record', () => {
    const file = path.join(dir, 'qa.jsonl');
    fs.writeFileSync(file, JSON.stringify({ instance_id: 'x' }) + '\n');
    expect(() => readQaDataset(file)).toThrow(/header/);
  });

  it('rejects a schema version mismatch', () => {
    const file = path.join(dir, 'qa.jsonl');
    fs.writeFileSync(file, JSON.stringify({ kind: 'qa_dataset', schema_version: 99 }) + '\n');
    expect(() => readQaDataset(file)).toThrow(/schema_version/);
  });

  it('round-trips instances behind the header', () => {
    const file = path.join(dir, 'qa.jsonl');
    const instance = {
      instance_id: 'd#e0#r#template#0',
      doc_id: 'd',
      event_index: 0,
      role: 'r',
      strategy: 'template',
      split: 'train',
      question: 'What is the r of the event x?',
      context_tokens: ['a', 'b', 'c'],
      answer: { start: 1, end: 1 },
      char_answer: { start: 2, end: 3 },
      flags: [],
    };
    writeJsonl(file, [{ kind: 'qa_dataset', schema_version: 1 }, instance]);
    expect(readQaDataset(file)).toEqual([instance]);
  });
});

describe('prediction writer', () => {
  it('writes one sorted record per prediction', () => {
    const file = path.join(dir, 'preds.jsonl');
    writePredictions(file, [
      { doc_id: 'b', event_index: 0, role: 'r', span: null, system_id: 's' },
      { doc_id: 'a', event_index: 0, role: 'r', span: { start: 0, end: 1 }, text: 'x y', system_id: 's' },
    ]);
    const lines = fs.readFileSync(file, 'utf-8').trim().split('\n').map((l) => JSON.parse(l));
    expect(lines.map((l) => l.doc_id)).toEqual(['a', 'b']);
    expect(lines[0].span).toEqual({ start: 0, end: 1 });
    expect(lines[1].span).toBeNull();
  });
});

describe('context questions writer', () => {
  it('emits a strategy header and validates question counts', () => {
    const file = path.join(dir, 'questions.jsonl');
    writeContextQuestions(file, [
      { doc_id: 'd', event_index: 0, role: 'r', questions: ['Q?'] },
    ]);
    const lines = fs.readFileSync(file, 'utf-8').trim().split('\n').map((l) => JSON.parse(l));
    expect(lines[0]).toEqual({ strategy: 'weak_llm_qg' });
    expect(lines[1].questions).toEqual(['Q?']);
    expect(() =>
      writeContextQuestions(file, [{ doc_id: 'd', event_index: 0, role: 'r', questions: [] }]),
    ).toThrow(/1\.\.5/);
  });
});

describe('corpus and qg readers', () => {
  it('reads canonical corpus documents', () => {
    const file = path.join(dir, 'corpus.jsonl');
    writeJsonl(file, [
      {
        doc_id: 'd',
        tokens: ['The', 'device', 'worked', '.'],
        sentences: [[0, 4]],
        events: [{ event_type: 't', trigger: [2, 2], arguments: [{ role: 'item', start: 1, end: 1 }] }],
      },
    ]);
    const docs = readCorpus(file);
    expect(docs).toHaveLength(1);
    expect(docs[0].events[0].arguments[0].role).toBe('item');
  });

  it('reads QG training examples', () => {
    const file = path.join(dir, 'qg.jsonl');
    writeJsonl(file, [
      { input: { document: 'a b c', trigger: 'b', role: 'r' }, target: 'What is b?' },
    ]);
    const examples = readQgTrainingSet(file);
    expect(examples[0].target).toBe('What is b?');
  });
});
