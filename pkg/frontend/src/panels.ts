// The three studio panels: layer picker (left), activation + latent editor
// (center), live preview with curve plot (right). Plain DOM, no framework.

import { sampleCurve } from './activations';
import type { ActivationSpecJson, CatalogEntry, GraphLayer, ParamInfo } from './types';

const CURVE_SAMPLES = 64;

// Canvas 2D is unavailable in some embedding contexts (e.g. jsdom); the
// panels must keep working without it, just with no pixels drawn.
function context2d(canvas: HTMLCanvasElement): CanvasRenderingContext2D | null {
  try {
    return canvas.getContext('2d');
  } catch {
    return null;
  }
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export interface LayerPanelHooks {
  onSelect(layerId: string): void;
  onToggle(layerId: string, enabled: boolean): void;
}

export function createLayerPanel(layers: GraphLayer[], hooks: LayerPanelHooks) {
  const root = el('div', 'panel layer-panel');
  root.appendChild(el('h2', undefined, 'Layers'));
  const list = el('ul', 'layer-list');
  root.appendChild(list);
  const rows = new Map<string, HTMLLIElement>();
  const toggles = new Map<string, HTMLInputElement>();

  for (const layer of layers) {
    const row = el('li', 'layer-row');
    row.dataset.layerId = layer.id;
    const toggle = el('input') as HTMLInputElement;
    toggle.type = 'checkbox';
    toggle.checked = layer.enabled;
    toggle.className = 'layer-toggle';
    toggle.addEventListener('change', () => hooks.onToggle(layer.id, toggle.checked));
    const label = el('button', 'layer-select', `${layer.id} (${layer.kind})`);
    label.addEventListener('click', () => hooks.onSelect(layer.id));
    row.append(toggle, label);
    list.appendChild(row);
    rows.set(layer.id, row);
    toggles.set(layer.id, toggle);
  }

  return {
    root,
    markSelected(layerId: string | null) {
      for (const [id, row] of rows) row.classList.toggle('selected', id === layerId);
    },
    resetToggles() {
      for (const layer of layers) toggles.get(layer.id)!.checked = layer.enabled;
    },
  };
}

export interface ActivationPanelHooks {
  onSpecChange(spec: ActivationSpecJson | null): void; // null = reset to base
}

export function createActivationPanel(catalog: CatalogEntry[], hooks: ActivationPanelHooks) {
  const root = el('div', 'panel activation-panel');
  root.appendChild(el('h2', undefined, 'Activation'));
  const baseLabel = el('div', 'base-activation');
  const kindSelect = el('select', 'kind-select') as HTMLSelectElement;
  const sliders = el('div', 'param-sliders');
  const resetButton = el('button', 'reset-to-base', 'Reset to base');
  const curve = el('canvas', 'curve-plot') as HTMLCanvasElement;
  curve.width = 240;
  curve.height = 120;
  root.append(baseLabel, kindSelect, sliders, resetButton, curve);

  const baseOption = el('option', undefined, 'base') as HTMLOptionElement;
  baseOption.value = '';
  kindSelect.appendChild(baseOption);
  for (const entry of catalog) {
    const option = el('option', undefined, entry.kind) as HTMLOptionElement;
    option.value = entry.kind;
    kindSelect.appendChild(option);
  }

  let current: ActivationSpecJson | null = null;
  let visibleRange: [number, number] = [-5, 5];

  function drawCurve(): void {
    const ctx = context2d(curve);
    if (!ctx || !current) return;
    ctx.clearRect(0, 0, curve.width, curve.height);
    const points = sampleCurve(current, visibleRange[0], visibleRange[1], CURVE_SAMPLES);
    const ys = points.map(([, y]) => y).filter(Number.isFinite);
    const yMin = Math.min(...ys, -1);
    const yMax = Math.max(...ys, 1);
    ctx.beginPath();
    points.forEach(([x, y], i) => {
      const px = ((x - visibleRange[0]) / (visibleRange[1] - visibleRange[0])) * curve.width;
      const py = curve.height - ((y - yMin) / (yMax - yMin)) * curve.height;
      if (i === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    });
    ctx.stroke();
  }

  function activeParams(entry: CatalogEntry, spec: ActivationSpecJson): ParamInfo[] {
    if (entry.kind !== 'poly') return entry.params;
    const degree = Math.trunc(spec.params.degree);
    return entry.params.filter(
      (p) => p.name === 'degree' || Number(p.name.slice(1)) <= degree
    );
  }

  function rebuildSliders(): void {
    sliders.textContent = '';
    if (!current) return;
    const entry = catalog.find((c) => c.kind === current!.kind)!;
    visibleRange = [-5, 5];
    for (const info of activeParams(entry, current)) {
      const wrap = el('label', 'param-slider');
      wrap.append(el('span', undefined, info.name));
      const slider = el('input') as HTMLInputElement;
      slider.type = 'range';
      slider.name = info.name;
      slider.min = String(info.soft_lo);
      slider.max = String(info.soft_hi);
      slider.step = info.integer ? '1' : String((info.soft_hi - info.soft_lo) / 200);
      slider.value = String(current!.params[info.name] ?? info.default);
      slider.addEventListener('input', () => {
        if (!current) return;
        const value = Number(slider.value);
        current.params[info.name] = info.integer ? Math.trunc(value) : value;
        if (info.name === 'degree') {
          normalizePolyWeights(current);
          rebuildSliders();
        }
        drawCurve();
        hooks.onSpecChange(current);
      });
      wrap.append(slider);
      sliders.append(wrap);
    }
    drawCurve();
  }

  function normalizePolyWeights(spec: ActivationSpecJson): void {
    const degree = Math.trunc(spec.params.degree);
    const params: Record<string, number> = { degree };
    for (let i = 0; i <= degree; i++) params[`w${i}`] = spec.params[`w${i}`] ?? 1;
    spec.params = params;
  }

  kindSelect.addEventListener('change', () => {
    if (kindSelect.value === '') {
      current = null;
      rebuildSliders();
      hooks.onSpecChange(null);
      return;
    }
    const entry = catalog.find((c) => c.kind === kindSelect.value)!;
    const params: Record<string, number> = {};
    for (const p of entry.params) params[p.name] = p.default;
    current = { kind: entry.kind, params };
    if (entry.kind === 'poly') normalizePolyWeights(current);
    rebuildSliders();
    hooks.onSpecChange(current);
  });

  resetButton.addEventListener('click', () => {
    current = null;
    kindSelect.value = '';
    rebuildSliders();
    hooks.onSpecChange(null);
  });

  return {
    root,
    /** Show a layer's situation: its base activation and any override. */
    showLayer(layer: GraphLayer, override: ActivationSpecJson | null) {
      baseLabel.textContent = layer.base_activation
        ? `base: ${layer.base_activation.kind}`
        : 'base: linear';
      current = override ? { kind: override.kind, params: { ...override.params } } : null;
      kindSelect.value = override ? override.kind : '';
      rebuildSliders();
    },
  };
}

export interface LatentPanelHooks {
  onEdit(index: number, value: number): void;
  onRandomize(): void;
  onReset(): void;
}

export function createLatentPanel(latentDim: number, hooks: LatentPanelHooks) {
  const root = el('div', 'panel latent-panel');
  root.appendChild(el('h2', undefined, 'Latent'));
  const grid = el('div', 'latent-grid');
  const randomize = el('button', 'latent-randomize', 'Randomize seed');
  const reset = el('button', 'latent-reset', 'Reset edits');
  root.append(grid, randomize, reset);

  const inputs: HTMLInputElement[] = [];
  for (let i = 0; i < latentDim; i++) {
    const slider = el('input', 'latent-slider') as HTMLInputElement;
    slider.type = 'range';
    slider.min = '-3';
    slider.max = '3';
    slider.step = '0.05';
    slider.value = '0';
    slider.dataset.index = String(i);
    slider.addEventListener('input', () => hooks.onEdit(i, Number(slider.value)));
    grid.appendChild(slider);
    inputs.push(slider);
  }
  randomize.addEventListener('click', () => hooks.onRandomize());
  reset.addEventListener('click', () => {
    for (const input of inputs) input.value = '0';
    hooks.onReset();
  });

  return { root, inputs };
}

export function createPreviewPanel() {
  const root = el('div', 'panel preview-panel');
  root.appendChild(el('h2', undefined, 'Preview'));
  const canvas = el('canvas', 'preview-canvas') as HTMLCanvasElement;
  const status = el('div', 'preview-status');
  const latency = el('span', 'render-latency');
  const seqLabel = el('span', 'preview-seq');
  const toast = el('div', 'toast');
  toast.hidden = true;
  status.append(seqLabel, latency);
  root.append(canvas, status, toast);

  let toastTimer: ReturnType<typeof setTimeout> | null = null;

  return {
    root,
    canvas,
    latency,
    seqLabel,
    toast,
    showFrame(width: number, height: number, rgba: Uint8ClampedArray<ArrayBuffer>, seq: number, renderMs: number) {
      canvas.width = width;
      canvas.height = height;
      const ctx = context2d(canvas);
      if (ctx) ctx.putImageData(new ImageData(rgba, width, height), 0, 0);
      seqLabel.textContent = `#${seq}`;
      latency.textContent = `${renderMs.toFixed(1)} ms`;
    },
    showToast(message: string) {
      toast.textContent = message;
      toast.hidden = false;
      if (toastTimer) clearTimeout(toastTimer);
      toastTimer = setTimeout(() => {
        toast.hidden = true;
      }, 4000);
    },
  };
}
