/**
 * Entry point. The service base URL is configurable at load time, in
 * precedence order: `?api=<url>` query parameter, then a global
 * `window.SMOKEINTENT_API_BASE`, then same-origin ('').
 */

import { createApp } from './app.js';

declare global {
  interface Window {
    SMOKEINTENT_API_BASE?: string;
  }
}

function resolveBaseUrl(): string {
  const fromQuery = new URLSearchParams(window.location.search).get('api');
  if (fromQuery) return fromQuery.replace(/\/$/, '');
  if (window.SMOKEINTENT_API_BASE) return window.SMOKEINTENT_API_BASE.replace(/\/$/, '');
  return '';
}

const root = document.getElementById('app');
if (!root) throw new Error('missing #app mount point');
createApp(root, resolveBaseUrl());
