/**
 * Question form rendering: one fieldset per question, paginated ten per
 * page (purely presentational — the submission payload is unaffected).
 *
 * Single-choice questions render as radio groups, multi-selects as
 * checkboxes, numeric ranges as dropdowns. Every question also offers an
 * explicit "prefer not to answer" control, which maps to omission in the
 * payload (the service codes omissions as 0). All controls are native
 * elements, so keyboard operation works out of the box.
 */

import type { Question } from './api.js';
import { Store } from './state.js';

function answerInputs(q: Question, store: Store): HTMLElement {
  const state = store.get();
  const wrap = document.createElement('div');
  wrap.className = 'options';

  if (q.multi) {
    const current = state.answers[q.id];
    const selected = new Set(Array.isArray(current) ? current : []);
    for (const opt of q.options) {
      const label = document.createElement('label');
      label.className = 'option';
      const box = document.createElement('input');
      box.type = 'checkbox';
      box.id = `ans-${q.id}-${opt.code}`;
      box.value = String(opt.code);
      box.checked = selected.has(opt.code);
      box.addEventListener('change', () => store.toggleOption(q.id, opt.code, box.checked));
      label.appendChild(box);
      label.appendChild(document.createTextNode(` ${opt.label}`));
      wrap.appendChild(label);
    }
    return wrap;
  }

  if (q.kind === 'numeric-range') {
    const select = document.createElement('select');
    select.id = `ans-${q.id}`;
    const placeholder = document.createElement('option');
    placeholder.value = '';
    placeholder.textContent = '— select an answer —';
    select.appendChild(placeholder);
    for (const opt of q.options) {
      const el = document.createElement('option');
      el.value = String(opt.code);
      el.textContent = opt.label;
      select.appendChild(el);
    }
    const current = state.answers[q.id];
    select.value = typeof current === 'number' ? String(current) : '';
    select.addEventListener('change', () => {
      if (select.value === '') store.clearAnswer(q.id);
      else store.setAnswer(q.id, Number(select.value));
    });
    wrap.appendChild(select);
    return wrap;
  }

  for (const opt of q.options) {
    const label = document.createElement('label');
    label.className = 'option';
    const radio = document.createElement('input');
    radio.type = 'radio';
    radio.name = `ans-${q.id}`;
    radio.id = `ans-${q.id}-${opt.code}`;
    radio.value = String(opt.code);
    radio.checked = state.answers[q.id] === opt.code;
    radio.addEventListener('change', () => {
      if (radio.checked) store.setAnswer(q.id, opt.code);
    });
    label.appendChild(radio);
    label.appendChild(document.createTextNode(` ${opt.label}`));
    wrap.appendChild(label);
  }
  return wrap;
}

function questionBlock(q: Question, store: Store): HTMLElement {
  const state = store.get();
  const block = document.createElement('fieldset');
  block.className = 'question';
  block.dataset.questionId = q.id;
  block.id = `qblock-${q.id}`;
  if (state.errorQuestionId === q.id) block.classList.add('error');
  if (q.id in state.answers) block.classList.add('answered');
  else if (state.skipped.has(q.id)) block.classList.add('skipped');

  const legend = document.createElement('legend');
  legend.textContent = `${q.id}. ${q.text}`;
  block.appendChild(legend);
  block.appendChild(answerInputs(q, store));

  const skipRow = document.createElement('label');
  skipRow.className = 'skip-row';
  const skipBox = document.createElement('input');
  skipBox.type = 'checkbox';
  skipBox.className = 'skip-box';
  skipBox.id = `skip-${q.id}`;
  skipBox.checked = state.skipped.has(q.id);
  skipBox.addEventListener('change', () => {
    if (skipBox.checked) store.skip(q.id);
    else store.clearAnswer(q.id);
  });
  skipRow.appendChild(skipBox);
  skipRow.appendChild(document.createTextNode(' Prefer not to answer'));
  block.appendChild(skipRow);
  return block;
}

export function renderQuestionnaire(container: HTMLElement, store: Store): void {
  const state = store.get();
  const focusedId = document.activeElement instanceof HTMLElement ? document.activeElement.id : '';
  container.innerHTML = '';

  if (state.questions.length === 0) {
    const empty = document.createElement('p');
    empty.className = 'empty-note';
    empty.textContent = 'This catalog has no questions to show.';
    container.appendChild(empty);
    return;
  }

  const progress = document.createElement('p');
  progress.className = 'page-progress';
  progress.textContent = `Page ${state.page + 1} of ${store.pageCount()}`;
  container.appendChild(progress);

  const list = document.createElement('div');
  list.className = 'question-list';
  for (const q of store.pageQuestions()) list.appendChild(questionBlock(q, store));
  container.appendChild(list);

  const pager = document.createElement('nav');
  pager.className = 'pager';
  pager.setAttribute('aria-label', 'questionnaire pages');
  const prev = document.createElement('button');
  prev.type = 'button';
  prev.id = 'pager-prev';
  prev.textContent = '← Previous';
  prev.disabled = state.page === 0;
  prev.addEventListener('click', () => store.set({ page: state.page - 1 }));
  const next = document.createElement('button');
  next.type = 'button';
  next.id = 'pager-next';
  next.textContent = 'Next →';
  next.disabled = state.page >= store.pageCount() - 1;
  next.addEventListener('click', () => store.set({ page: state.page + 1 }));
  pager.appendChild(prev);
  pager.appendChild(next);
  container.appendChild(pager);

  if (focusedId) document.getElementById(focusedId)?.focus();
}
