/**
 * Circular "bubble" gauge: fills to the returned probability and shows
 * the percentage. Renders exactly what the service said — no rounding
 * tricks beyond display formatting, no local inference.
 */

import type { PredictionResponse } from './api.js';

const RADIUS = 54;
const CIRCUMFERENCE = 2 * Math.PI * RADIUS;

export function renderGauge(container: HTMLElement, response: PredictionResponse | null): void {
  container.innerHTML = '';
  container.classList.add('gauge');

  const probability = response ? response.probability_yes : 0;
  const percent = Math.round(probability * 100);

  const svg = document.createElementNS('http://www.w3.org/2000/svg', 'svg');
  svg.setAttribute('viewBox', '0 0 140 140');
  svg.setAttribute('role', 'img');
  svg.setAttribute('aria-label', response ? `Predicted probability ${percent}%` : 'No prediction yet');

  const track = document.createElementNS('http://www.w3.org/2000/svg', 'circle');
  track.setAttribute('class', 'gauge-track');
  track.setAttribute('cx', '70');
  track.setAttribute('cy', '70');
  track.setAttribute('r', String(RADIUS));

  const fill = document.createElementNS('http://www.w3.org/2000/svg', 'circle');
  fill.setAttribute('class', 'gauge-fill');
  fill.setAttribute('cx', '70');
  fill.setAttribute('cy', '70');
  fill.setAttribute('r', String(RADIUS));
  fill.setAttribute('stroke-dasharray', CIRCUMFERENCE.toFixed(3));
  fill.setAttribute('stroke-dashoffset', (CIRCUMFERENCE * (1 - probability)).toFixed(3));

  svg.appendChild(track);
  svg.appendChild(fill);
  container.appendChild(svg);

  const text = document.createElement('div');
  text.className = 'gauge-text';
  container.dataset.fillPercent = String(percent);

  if (response) {
    const value = document.createElement('strong');
    value.className = 'gauge-value';
    value.textContent = `${percent}%`;
    const caption = document.createElement('span');
    caption.className = 'gauge-caption';
    caption.textContent =
      response.label === 1
        ? 'predicted: intends to smoke within the year'
        : 'predicted: no smoking intention';
    text.appendChild(value);
    text.appendChild(caption);
  } else {
    const placeholder = document.createElement('span');
    placeholder.className = 'gauge-caption';
    placeholder.textContent = 'submit your answers to see the prediction';
    text.appendChild(placeholder);
  }
  container.appendChild(text);
}
