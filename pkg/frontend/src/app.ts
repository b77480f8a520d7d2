/**
 * Application shell: loads the questionnaire, handles submission and
 * errors, and keeps the gauge equal to the last service response.
 *
 * Submission rules: at most one request in flight (the button disables
 * while pending); a failed submission never touches the answers map, so
 * retrying is always possible; a validation error highlights the
 * offending question and jumps to its page. Resubmission after changing
 * any answer is the intended what-if loop.
 */

import { ApiError, fetchQuestions, submitAnswers } from './api.js';
import { renderGauge } from './gauge.js';
import { renderQuestionnaire } from './questionnaire.js';
import { Store } from './state.js';

export interface App {
  store: Store;
  root: HTMLElement;
  reload: () => Promise<void>;
  submit: () => Promise<void>;
}

function buildLayout(root: HTMLElement): Record<string, HTMLElement> {
  root.innerHTML = `
    <header class="app-header">
      <h1>Smoking intention questionnaire</h1>
      <p class="intro">Answer what you can; skipped questions count as unanswered.
        The prediction comes from a model trained on national youth survey data.</p>
    </header>
    <div class="layout">
      <section id="questionnaire" class="questionnaire-panel" aria-live="polite"></section>
      <aside class="result-panel">
        <div id="gauge"></div>
        <p id="unanswered-note" class="unanswered-note"></p>
        <button id="submit-btn" type="button">Get prediction</button>
        <p id="submit-error" class="submit-error" role="alert"></p>
        <p id="model-note" class="model-note"></p>
      </aside>
    </div>`;
  const pick = (selector: string) => root.querySelector<HTMLElement>(selector)!;
  return {
    questionnaire: pick('#questionnaire'),
    gauge: pick('#gauge'),
    unansweredNote: pick('#unanswered-note'),
    submitBtn: pick('#submit-btn'),
    submitError: pick('#submit-error'),
    modelNote: pick('#model-note'),
  };
}

function renderLoadError(container: HTMLElement, message: string, onRetry: () => void): void {
  container.innerHTML = '';
  const box = document.createElement('div');
  box.className = 'load-error';
  box.setAttribute('role', 'alert');
  const text = document.createElement('p');
  text.textContent = `Could not load the questionnaire: ${message}`;
  const retry = document.createElement('button');
  retry.type = 'button';
  retry.id = 'retry-load';
  retry.textContent = 'Retry';
  retry.addEventListener('click', onRetry);
  box.appendChild(text);
  box.appendChild(retry);
  container.appendChild(box);
}

export function createApp(root: HTMLElement, baseUrl: string): App {
  const store = new Store();
  const els = buildLayout(root);

  async function reload(): Promise<void> {
    store.set({ status: 'loading', loadError: '' });
    try {
      const payload = await fetchQuestions(baseUrl);
      store.set({
        status: 'ready',
        questions: payload.questions,
        catalogVersion: payload.catalog_version,
        page: 0,
      });
    } catch (err) {
      store.set({ status: 'error', loadError: err instanceof Error ? err.message : String(err) });
    }
  }

  async function submit(): Promise<void> {
    const state = store.get();
    if (state.submitting || state.status !== 'ready') return;
    store.set({ submitting: true, submitError: '', errorQuestionId: null });
    try {
      const response = await submitAnswers(baseUrl, store.get().answers);
      store.set({ submitting: false, lastResponse: response });
    } catch (err) {
      if (err instanceof ApiError && err.questionId) {
        store.set({
          submitting: false,
          submitError: err.message,
          errorQuestionId: err.questionId,
          page: store.pageOf(err.questionId),
        });
      } else {
        const message = err instanceof Error ? err.message : String(err);
        store.set({ submitting: false, submitError: `${message} — your answers are kept; try again.` });
      }
    }
  }

  function render(): void {
    const state = store.get();
    if (state.status === 'loading') {
      els.questionnaire.innerHTML = '<p class="loading-note">Loading questions…</p>';
    } else if (state.status === 'error') {
      renderLoadError(els.questionnaire, state.loadError, () => void reload());
    } else {
      renderQuestionnaire(els.questionnaire, store);
    }

    renderGauge(els.gauge, state.lastResponse);

    const unanswered = store.unansweredCount();
    els.unansweredNote.textContent =
      state.status !== 'ready' || state.questions.length === 0
        ? ''
        : unanswered === 0
          ? 'All questions handled.'
          : `${unanswered} of ${state.questions.length} questions unanswered (they submit as unanswered).`;

    const btn = els.submitBtn as HTMLButtonElement;
    btn.disabled = state.submitting || state.status !== 'ready' || state.questions.length === 0;
    btn.textContent = state.submitting
      ? 'Predicting…'
      : state.lastResponse
        ? 'Resubmit with my changes'
        : 'Get prediction';

    els.submitError.textContent = state.submitError;
    els.modelNote.textContent = state.lastResponse
      ? `model ${state.lastResponse.model_id.slice(0, 12)} · catalog ${state.lastResponse.catalog_version}`
      : '';
  }

  els.submitBtn.addEventListener('click', () => void submit());
  store.subscribe(render);
  render();
  void reload();
  return { store, root, reload, submit };
}
