/* tslint:disable */
/* eslint-disable */

/**
 * Pearson correlation of two comma- or space-separated number lists.
 */
export function correlate(xs: string, ys: string): string;

/**
 * Trains `learner` ("exact", "hist" or "ensemble") on noisy samples of a
 * fixed curve and returns the samples, the fitted curve on a grid, and
 * training metrics.
 */
export function fit_curve(learner: string, n_samples: number, n_trees: number, learning_rate: number, max_depth: number, bins: number, noise: number, seed: number): string;

/**
 * Inverse-MAE fusion weights for two holdout errors.
 */
export function fusion_weights(mae_exact: number, mae_hist: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly correlate: (a: number, b: number, c: number, d: number) => [number, number];
    readonly fit_curve: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number];
    readonly fusion_weights: (a: number, b: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
