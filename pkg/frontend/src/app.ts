// Studio bootstrap: fetch the model and activation catalog, build the
// three panels, and drive the live channel. All service interaction goes
// through the injectable hooks so tests can run against a mocked backend.

import { LiveChannel, type SocketLike } from './channel';
import { WorkingPatch } from './patch';
import {
  createActivationPanel,
  createLatentPanel,
  createLayerPanel,
  createPreviewPanel,
} from './panels';
import { decodeBase64, decodePpm } from './ppm';
import type { CatalogEntry, GraphLayer } from './types';

export interface StudioServices {
  fetchJson(path: string): Promise<unknown>;
  makeSocket?: (url: string) => SocketLike;
  wsUrl?: string;
  debounceMs?: number;
  randomSeed?: () => number;
}

export interface Studio {
  root: HTMLElement;
  layers: GraphLayer[];
  catalog: CatalogEntry[];
  patch: WorkingPatch;
  channel: LiveChannel;
  seed: number;
  selectedLayer: string | null;
  emit(): void;
}

export async function createStudio(
  root: HTMLElement,
  services: StudioServices
): Promise<Studio> {
  const layers = (await services.fetchJson('/api/model')) as GraphLayer[];
  const catalog = (await services.fetchJson('/api/activations')) as CatalogEntry[];
  const latentDim = layers.find((l) => l.id === 'map.0')?.output_shape[1] ?? 64;
  const randomSeed =
    services.randomSeed ?? (() => Math.floor(Math.random() * 2 ** 31));

  const patch = new WorkingPatch();
  const studio: Studio = {
    root,
    layers,
    catalog,
    patch,
    channel: undefined as unknown as LiveChannel,
    seed: randomSeed(),
    selectedLayer: null,
    emit,
  };

  const preview = createPreviewPanel();
  const channel = new LiveChannel({
    url: services.wsUrl ?? `ws://${location.host}/ws`,
    debounceMs: services.debounceMs,
    makeSocket: services.makeSocket,
    onFrame: (frame) => {
      const image = decodePpm(decodeBase64(frame.image));
      preview.showFrame(image.width, image.height, image.rgba, frame.seq, frame.render_ms);
    },
    onError: (reply) => {
      const first = reply.error.errors[0];
      preview.showToast(first ? `${first.code}: ${first.message}` : 'render failed');
    },
    onStatus: (connected) => {
      root.classList.toggle('disconnected', !connected);
    },
  });
  studio.channel = channel;

  function emit(): void {
    // the UI never sends a patch the server would reject for schema reasons
    const problems = patch.validate(catalog);
    if (problems.length > 0) {
      preview.showToast(problems[0]);
      return;
    }
    channel.request(patch.toDoc(), studio.seed);
  }

  const layerPanel = createLayerPanel(layers, {
    onSelect(layerId) {
      studio.selectedLayer = layerId;
      layerPanel.markSelected(layerId);
      const layer = layers.find((l) => l.id === layerId)!;
      activationPanel.showLayer(layer, patch.overrides.get(layerId) ?? null);
    },
    onToggle(layerId, enabled) {
      patch.setEnabled(layerId, enabled);
      emit();
    },
  });

  const activationPanel = createActivationPanel(catalog, {
    onSpecChange(spec) {
      if (studio.selectedLayer === null) return;
      if (spec === null) patch.clearOverride(studio.selectedLayer);
      else patch.setOverride(studio.selectedLayer, spec);
      emit();
    },
  });

  const latentPanel = createLatentPanel(latentDim, {
    onEdit(index, value) {
      patch.setLatentEdit(index, value);
      emit();
    },
    onRandomize() {
      patch.latentEdits.clear();
      patch.seed = randomSeed();
      emit();
    },
    onReset() {
      patch.latentEdits.clear();
      emit();
    },
  });

  const resetAll = document.createElement('button');
  resetAll.className = 'reset-all';
  resetAll.textContent = 'Reset all';
  resetAll.addEventListener('click', () => {
    patch.reset();
    layerPanel.resetToggles();
    for (const input of latentPanel.inputs) input.value = '0';
    if (studio.selectedLayer !== null) {
      const layer = layers.find((l) => l.id === studio.selectedLayer)!;
      activationPanel.showLayer(layer, null);
    }
    emit();
  });

  const left = document.createElement('div');
  left.className = 'column left';
  left.append(resetAll, layerPanel.root);
  const center = document.createElement('div');
  center.className = 'column center';
  center.append(activationPanel.root, latentPanel.root);
  const right = document.createElement('div');
  right.className = 'column right';
  right.appendChild(preview.root);
  root.append(left, center, right);

  emit(); // initial frame
  return studio;
}
