// End-to-end studio behavior against a fully mocked service: the layer list,
// schema-driven sliders, debounced emission, monotonic frame display, and
// reset back to the empty patch document.

import { afterEach, beforeEach, describe, expect, it, vi } from 'vitest';
import { createStudio, type Studio } from '../src/app';
import { frameReply, mockFetchJson, MockSocket } from './mocks';

const EMPTY_DOC = {
  version: 1,
  activation_overrides: {},
  enable_overrides: {},
  latent_edits: {},
  seed: null,
};

let socket: MockSocket;
let studio: Studio;
let root: HTMLElement;

async function boot(): Promise<void> {
  socket = new MockSocket();
  root = document.createElement('div');
  document.body.appendChild(root);
  studio = await createStudio(root, {
    fetchJson: mockFetchJson,
    makeSocket: () => socket,
    wsUrl: 'ws://test/ws',
    randomSeed: () => 0,
  });
  socket.open();
}

function fire(node: Element, type: string): void {
  node.dispatchEvent(new Event(type, { bubbles: true }));
}

function selectLayer(id: string): void {
  const row = root.querySelector(`.layer-row[data-layer-id="${id}"]`)!;
  (row.querySelector('.layer-select') as HTMLButtonElement).click();
}

function chooseKind(kind: string): void {
  const select = root.querySelector('.kind-select') as HTMLSelectElement;
  select.value = kind;
  fire(select, 'change');
}

function paramSlider(name: string): HTMLInputElement {
  return root.querySelector(`.param-sliders input[name="${name}"]`) as HTMLInputElement;
}

function drainTimers(): void {
  vi.advanceTimersByTime(100);
}

describe('studio against a mocked service', () => {
  beforeEach(async () => {
    vi.useFakeTimers();
    await boot();
  });
  afterEach(() => {
    vi.useRealTimers();
    document.body.textContent = '';
  });

  it('loads all sixteen layers in order', () => {
    const rows = [...root.querySelectorAll('.layer-row')];
    expect(rows).toHaveLength(16);
    const ids = rows.map((r) => (r as HTMLElement).dataset.layerId);
    expect(ids.slice(0, 4)).toEqual(['map.0', 'map.1', 'map.2', 'map.3']);
    expect(ids[4]).toBe('syn.0.proj');
    expect(ids[15]).toBe('syn.3.torgb');
  });

  it('requests an initial frame with the empty patch document', () => {
    drainTimers();
    expect(socket.sent).toHaveLength(1);
    expect(socket.lastSent().patches).toEqual(EMPTY_DOC);
  });

  it('builds sliders from the catalog schema with its stated bounds', () => {
    selectLayer('map.0');
    chooseKind('sinlu');
    const a = paramSlider('a');
    expect(a.min).toBe('-5');
    expect(a.max).toBe('5');
    expect(a.value).toBe('1');
    expect(paramSlider('b')).toBeTruthy();
  });

  it('bounds the polynomial weight sliders to [0.5, 1.5]', () => {
    selectLayer('map.1');
    chooseKind('poly');
    for (const name of ['w0', 'w1', 'w2', 'w3']) {
      const slider = paramSlider(name);
      expect(slider.min).toBe('0.5');
      expect(slider.max).toBe('1.5');
    }
    const degree = paramSlider('degree');
    expect(degree.step).toBe('1');
    // lowering the degree removes the extra weight sliders
    degree.value = '1';
    fire(degree, 'input');
    expect(paramSlider('w1')).toBeTruthy();
    expect(paramSlider('w2')).toBeNull();
    drainTimers();
    const doc = socket.lastSent().patches as typeof EMPTY_DOC;
    expect(doc.activation_overrides).toEqual({
      'map.1': { kind: 'poly', params: { degree: 1, w0: 1, w1: 1 } },
    });
  });

  it('emits at most one request per 50 ms during a slider drag', () => {
    selectLayer('map.0');
    chooseKind('sinlu');
    drainTimers();
    const before = socket.sent.length;
    const slider = paramSlider('a');
    // a 300 ms drag with an input event every 5 ms
    for (let t = 0; t < 300; t += 5) {
      slider.value = String(-5 + (10 * t) / 300);
      fire(slider, 'input');
      vi.advanceTimersByTime(5);
    }
    drainTimers();
    const emitted = socket.sent.length - before;
    expect(emitted).toBeGreaterThan(0);
    expect(emitted).toBeLessThanOrEqual(Math.ceil(400 / 50));
    // the final message carries the last slider position
    const doc = socket.lastSent().patches as typeof EMPTY_DOC;
    const override = doc.activation_overrides['map.0'] as {
      kind: string;
      params: Record<string, number>;
    };
    expect(override.params.a).toBeCloseTo(Number(slider.value), 9);
  });

  it('keeps the displayed seq monotonic when replies arrive out of order', () => {
    const seqLabel = root.querySelector('.preview-seq') as HTMLElement;
    socket.reply(frameReply(2));
    expect(seqLabel.textContent).toBe('#2');
    socket.reply(frameReply(1)); // stale frame must not regress the display
    expect(seqLabel.textContent).toBe('#2');
    socket.reply(frameReply(5));
    expect(seqLabel.textContent).toBe('#5');
    expect(studio.channel.lastShownSeq).toBe(5);
  });

  it('shows a toast on error replies and keeps accepting frames', () => {
    const toast = root.querySelector('.toast') as HTMLElement;
    socket.reply({
      seq: 3,
      error: {
        errors: [{ code: 'unknown_layer', subject: 'map.9', message: 'no such layer' }],
        warnings: [],
      },
    });
    expect(toast.hidden).toBe(false);
    expect(toast.textContent).toContain('unknown_layer');
    socket.reply(frameReply(4));
    expect((root.querySelector('.preview-seq') as HTMLElement).textContent).toBe('#4');
  });

  it('never sends a schema-invalid patch', () => {
    drainTimers();
    const before = socket.sent.length;
    studio.patch.setOverride('map.0', { kind: 'sinlu', params: { a: NaN, b: 1 } });
    studio.emit();
    drainTimers();
    expect(socket.sent.length).toBe(before);
    expect((root.querySelector('.toast') as HTMLElement).hidden).toBe(false);
  });

  it('toggling a layer emits an enable override and toggling back clears it', () => {
    const row = root.querySelector('.layer-row[data-layer-id="syn.2.torgb"]')!;
    const toggle = row.querySelector('.layer-toggle') as HTMLInputElement;
    toggle.checked = false;
    fire(toggle, 'change');
    drainTimers();
    let doc = socket.lastSent().patches as typeof EMPTY_DOC;
    expect(doc.enable_overrides).toEqual({ 'syn.2.torgb': false });
    toggle.checked = true;
    fire(toggle, 'change');
    drainTimers();
    doc = socket.lastSent().patches as typeof EMPTY_DOC;
    expect(doc).toEqual(EMPTY_DOC);
  });

  it('latent sliders emit sparse edits and randomize swaps the seed', () => {
    const slider = root.querySelector('.latent-slider[data-index="5"]') as HTMLInputElement;
    slider.value = '1.5';
    fire(slider, 'input');
    drainTimers();
    const doc = socket.lastSent().patches as typeof EMPTY_DOC;
    expect(doc.latent_edits).toEqual({ '5': 1.5 });
    (root.querySelector('.latent-randomize') as HTMLButtonElement).click();
    drainTimers();
    const next = socket.lastSent().patches as typeof EMPTY_DOC;
    expect(next.latent_edits).toEqual({});
    expect(next.seed).toBe(0);
  });

  it('a full session ends with reset restoring the empty patch document', () => {
    // edit: disable a layer, override an activation, drag a param, edit latent
    const row = root.querySelector('.layer-row[data-layer-id="syn.1.conv"]')!;
    const toggle = row.querySelector('.layer-toggle') as HTMLInputElement;
    toggle.checked = false;
    fire(toggle, 'change');
    selectLayer('map.2');
    chooseKind('shilu');
    const a = paramSlider('a');
    a.value = '2.5';
    fire(a, 'input');
    const latent = root.querySelector('.latent-slider[data-index="0"]') as HTMLInputElement;
    latent.value = '-1';
    fire(latent, 'input');
    drainTimers();
    expect(studio.patch.isEmpty()).toBe(false);
    const doc = socket.lastSent().patches as typeof EMPTY_DOC;
    expect(doc.enable_overrides).toEqual({ 'syn.1.conv': false });
    expect(doc.activation_overrides['map.2']).toEqual({
      kind: 'shilu',
      params: { a: 2.5, b: 0 },
    });

    (root.querySelector('.reset-all') as HTMLButtonElement).click();
    drainTimers();
    expect(studio.patch.isEmpty()).toBe(true);
    expect(socket.lastSent().patches).toEqual(EMPTY_DOC);
    expect(toggle.checked).toBe(true);
    expect(latent.value).toBe('0');
    // the activation panel fell back to the base activation
    expect((root.querySelector('.kind-select') as HTMLSelectElement).value).toBe('');
  });
});
