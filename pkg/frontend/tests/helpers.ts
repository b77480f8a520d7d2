/**
 * Test helpers: a scriptable fetch stub standing in for the service.
 *
 * The stub replies are plain objects shaped like the subset of Response
 * the client uses (ok / status / json), so tests control timing and
 * failures without any real networking.
 */

import { vi } from 'vitest';
import type { AnswersMap, QuestionsPayload } from '../src/api.js';
import fixture from './fixtures/nyts2018-questions.json';

export const NYTS_FIXTURE = fixture as QuestionsPayload;

export interface StubReply {
  status: number;
  body: unknown;
}

export type PredictHandler = (answers: AnswersMap) => StubReply | Promise<StubReply> | 'network-error';

export interface FetchStub {
  calls: { url: string; body: unknown }[];
  predictCalls: number;
  setPredict(handler: PredictHandler): void;
  setQuestions(reply: StubReply | 'network-error'): void;
  restore(): void;
}

function asResponse(reply: StubReply) {
  return {
    ok: reply.status >= 200 && reply.status < 300,
    status: reply.status,
    json: async () => reply.body,
  };
}

export function installFetchStub(
  questions: StubReply | 'network-error' = { status: 200, body: NYTS_FIXTURE },
  predict: PredictHandler = () => ({ status: 503, body: { detail: 'no handler' } }),
): FetchStub {
  let questionsReply = questions;
  let predictHandler = predict;
  const stub: FetchStub = {
    calls: [],
    predictCalls: 0,
    setPredict: (handler) => {
      predictHandler = handler;
    },
    setQuestions: (reply) => {
      questionsReply = reply;
    },
    restore: () => {
      vi.unstubAllGlobals();
    },
  };

  const fake = vi.fn(async (url: string, init?: RequestInit) => {
    const body = init?.body ? JSON.parse(String(init.body)) : null;
    stub.calls.push({ url, body });
    if (url.endsWith('/api/questions')) {
      if (questionsReply === 'network-error') throw new TypeError('fetch failed');
      return asResponse(questionsReply);
    }
    if (url.endsWith('/api/predict')) {
      stub.predictCalls += 1;
      const reply = predictHandler(body.answers as AnswersMap);
      if (reply === 'network-error') throw new TypeError('fetch failed');
      return asResponse(await reply);
    }
    throw new Error(`unexpected url ${url}`);
  });
  vi.stubGlobal('fetch', fake);
  return stub;
}

export function prediction(probability: number, label?: number) {
  return {
    status: 200,
    body: {
      probability_yes: probability,
      label: label ?? (probability > 0.5 ? 1 : 0),
      model_id: 'stub-model-0001',
      catalog_version: NYTS_FIXTURE.catalog_version,
    },
  };
}

/** Resolve once all already-queued microtasks have run. */
export async function flush(): Promise<void> {
  await new Promise((resolve) => setTimeout(resolve, 0));
}

export interface Deferred {
  reply: Promise<StubReply>;
  resolve: (reply: StubReply) => void;
}

export function deferred(): Deferred {
  let resolver: (reply: StubReply) => void;
  const reply = new Promise<StubReply>((resolve) => {
    resolver = resolve;
  });
  return { reply, resolve: resolver! };
}
