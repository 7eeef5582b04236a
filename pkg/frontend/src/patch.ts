// The working PatchSet: the single mutable piece of session state. Every
// edit goes through here, and the emitted document always validates
// against the cached activation catalog before it is sent.

import type { ActivationSpecJson, CatalogEntry, PatchDoc } from './types';

function sortedRecord<T>(map: Map<string, T>): Record<string, T> {
  const out: Record<string, T> = {};
  for (const key of [...map.keys()].sort()) out[key] = map.get(key)!;
  return out;
}

export class WorkingPatch {
  readonly overrides = new Map<string, ActivationSpecJson>();
  readonly enables = new Map<string, boolean>();
  readonly latentEdits = new Map<number, number>();
  seed: number | null = null;

  setOverride(layerId: string, spec: ActivationSpecJson): void {
    this.overrides.set(layerId, {
      kind: spec.kind,
      params: { ...spec.params },
    });
  }

  clearOverride(layerId: string): void {
    this.overrides.delete(layerId);
  }

  setEnabled(layerId: string, enabled: boolean): void {
    // only deviations from the graph's default (everything enabled) are kept
    if (enabled) this.enables.delete(layerId);
    else this.enables.set(layerId, false);
  }

  setLatentEdit(index: number, value: number): void {
    this.latentEdits.set(index, value);
  }

  clearLatentEdit(index: number): void {
    this.latentEdits.delete(index);
  }

  reset(): void {
    this.overrides.clear();
    this.enables.clear();
    this.latentEdits.clear();
    this.seed = null;
  }

  isEmpty(): boolean {
    return (
      this.overrides.size === 0 &&
      this.enables.size === 0 &&
      this.latentEdits.size === 0 &&
      this.seed === null
    );
  }

  toDoc(): PatchDoc {
    const edits: Record<string, number> = {};
    for (const index of [...this.latentEdits.keys()].sort((a, b) => a - b)) {
      edits[String(index)] = this.latentEdits.get(index)!;
    }
    return {
      version: 1,
      activation_overrides: sortedRecord(this.overrides),
      enable_overrides: sortedRecord(this.enables),
      latent_edits: edits,
      seed: this.seed,
    };
  }

  /** Schema validation mirroring the server catalog; returns violations. */
  validate(catalog: CatalogEntry[]): string[] {
    const byKind = new Map(catalog.map((entry) => [entry.kind, entry]));
    const problems: string[] = [];
    for (const [layerId, spec] of this.overrides) {
      const entry = byKind.get(spec.kind);
      if (!entry) {
        problems.push(`${layerId}: unknown activation kind ${spec.kind}`);
        continue;
      }
      if (spec.kind === 'poly') {
        const degree = spec.params.degree;
        if (!Number.isInteger(degree) || degree < 1 || degree > 3) {
          problems.push(`${layerId}: poly degree must be 1-3`);
          continue;
        }
        const expected = ['degree'];
        for (let i = 0; i <= degree; i++) expected.push(`w${i}`);
        const given = Object.keys(spec.params).sort();
        if (given.join() !== expected.sort().join()) {
          problems.push(`${layerId}: expected ${degree + 1} weights`);
        }
      } else {
        const expected = entry.params.map((p) => p.name).sort();
        const given = Object.keys(spec.params).sort();
        if (given.join() !== expected.join()) {
          problems.push(`${layerId}: parameters must be exactly {${expected}}`);
        }
      }
      for (const [name, value] of Object.entries(spec.params)) {
        if (!Number.isFinite(value)) problems.push(`${layerId}: ${name} is not finite`);
      }
    }
    for (const [, value] of this.latentEdits) {
      if (!Number.isFinite(value)) problems.push('latent edit is not finite');
    }
    return problems;
  }
}
