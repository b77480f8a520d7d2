import { describe, expect, it } from 'vitest';

import { renderGauge } from '../src/gauge.js';

const CIRCUMFERENCE = 2 * Math.PI * 54;

function response(probability: number, label = probability > 0.5 ? 1 : 0) {
  return {
    probability_yes: probability,
    label,
    model_id: 'stub-model',
    catalog_version: 'nyts2018:2018.1',
  };
}

describe('gauge rendering', () => {
  it('fills to 73% for probability 0.73', () => {
    const el = document.createElement('div');
    renderGauge(el, response(0.73));
    expect(el.dataset.fillPercent).toBe('73');
    expect(el.querySelector('.gauge-value')?.textContent).toBe('73%');
    const offset = Number(el.querySelector('.gauge-fill')?.getAttribute('stroke-dashoffset'));
    expect(offset).toBeCloseTo(CIRCUMFERENCE * 0.27, 2);
  });

  it('renders an empty gauge for probability 0', () => {
    const el = document.createElement('div');
    renderGauge(el, response(0.0, 0));
    expect(el.dataset.fillPercent).toBe('0');
    const offset = Number(el.querySelector('.gauge-fill')?.getAttribute('stroke-dashoffset'));
    expect(offset).toBeCloseTo(CIRCUMFERENCE, 2);
  });

  it('renders a full gauge for probability 1', () => {
    const el = document.createElement('div');
    renderGauge(el, response(1.0, 1));
    const offset = Number(el.querySelector('.gauge-fill')?.getAttribute('stroke-dashoffset'));
    expect(offset).toBeCloseTo(0, 2);
  });

  it('shows the label text from the response', () => {
    const el = document.createElement('div');
    renderGauge(el, response(0.8, 1));
    expect(el.querySelector('.gauge-caption')?.textContent).toContain('intends to smoke');
    renderGauge(el, response(0.1, 0));
    expect(el.querySelector('.gauge-caption')?.textContent).toContain('no smoking intention');
  });

  it('shows a placeholder before any prediction', () => {
    const el = document.createElement('div');
    renderGauge(el, null);
    expect(el.querySelector('.gauge-value')).toBeNull();
    expect(el.textContent).toContain('submit');
  });
});
