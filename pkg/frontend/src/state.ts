/**
 * Questionnaire state: served questions, the answers map, submission
 * status, and the last prediction. One store, subscriber-notified.
 *
 * Invariants enforced here:
 * - answers only ever hold codes present in the question's served options
 * - at most one submission is in flight (submitting flag)
 * - the displayed probability is always exactly the last response; the UI
 *   computes nothing itself
 */

import type { AnswersMap, PredictionResponse, Question } from './api.js';

export type LoadStatus = 'loading' | 'ready' | 'error';

export interface QuestionnaireState {
  status: LoadStatus;
  loadError: string;
  questions: Question[];
  catalogVersion: string;
  /** question id -> selected code (single) or codes (multi); absent = unanswered */
  answers: AnswersMap;
  /** questions explicitly skipped ("prefer not to answer"); omitted on submit */
  skipped: Set<string>;
  page: number;
  submitting: boolean;
  submitError: string;
  /** question the server blamed for a validation failure, if any */
  errorQuestionId: string | null;
  lastResponse: PredictionResponse | null;
}

export const PAGE_SIZE = 10;

type Listener = (state: QuestionnaireState) => void;

export class Store {
  private state: QuestionnaireState;
  private listeners: Listener[] = [];

  constructor() {
    this.state = {
      status: 'loading',
      loadError: '',
      questions: [],
      catalogVersion: '',
      answers: {},
      skipped: new Set(),
      page: 0,
      submitting: false,
      submitError: '',
      errorQuestionId: null,
      lastResponse: null,
    };
  }

  get(): QuestionnaireState {
    return this.state;
  }

  set(patch: Partial<QuestionnaireState>): void {
    this.state = { ...this.state, ...patch };
    for (const fn of this.listeners) fn(this.state);
  }

  subscribe(fn: Listener): () => void {
    this.listeners.push(fn);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== fn);
    };
  }

  question(id: string): Question | undefined {
    return this.state.questions.find((q) => q.id === id);
  }

  private validCode(id: string, code: number): boolean {
    const q = this.question(id);
    return !!q && q.options.some((opt) => opt.code === code);
  }

  /** Select a single-choice answer. Clears any explicit skip. */
  setAnswer(id: string, code: number): void {
    if (!this.validCode(id, code)) return;
    const answers = { ...this.state.answers, [id]: code };
    const skipped = new Set(this.state.skipped);
    skipped.delete(id);
    this.set({ answers, skipped });
  }

  /** Toggle one option of a multi-select. An empty selection is unanswered. */
  toggleOption(id: string, code: number, selected: boolean): void {
    if (!this.validCode(id, code)) return;
    const current = this.state.answers[id];
    const set = new Set(Array.isArray(current) ? current : []);
    if (selected) set.add(code);
    else set.delete(code);
    const answers = { ...this.state.answers };
    if (set.size > 0) answers[id] = [...set].sort((a, b) => a - b);
    else delete answers[id];
    const skipped = new Set(this.state.skipped);
    skipped.delete(id);
    this.set({ answers, skipped });
  }

  /** Explicit "prefer not to answer": drop the answer, mark as handled. */
  skip(id: string): void {
    if (!this.question(id)) return;
    const answers = { ...this.state.answers };
    delete answers[id];
    const skipped = new Set(this.state.skipped);
    skipped.add(id);
    this.set({ answers, skipped });
  }

  /** Back to a blank, unanswered state. */
  clearAnswer(id: string): void {
    const answers = { ...this.state.answers };
    delete answers[id];
    const skipped = new Set(this.state.skipped);
    skipped.delete(id);
    this.set({ answers, skipped });
  }

  /** Questions neither answered nor explicitly skipped. */
  unansweredCount(): number {
    return this.state.questions.filter(
      (q) => !(q.id in this.state.answers) && !this.state.skipped.has(q.id),
    ).length;
  }

  pageCount(): number {
    return Math.max(1, Math.ceil(this.state.questions.length / PAGE_SIZE));
  }

  pageQuestions(): Question[] {
    const start = this.state.page * PAGE_SIZE;
    return this.state.questions.slice(start, start + PAGE_SIZE);
  }

  pageOf(questionId: string): number {
    const idx = this.state.questions.findIndex((q) => q.id === questionId);
    return idx < 0 ? 0 : Math.floor(idx / PAGE_SIZE);
  }
}
