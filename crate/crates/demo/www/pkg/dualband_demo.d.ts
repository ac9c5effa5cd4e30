/* tslint:disable */
/* eslint-disable */

/**
 * One paired run of both policies on the same scenario and channel draws.
 * Returns per-slot band bits, matching rounds, the violation rate, and
 * per-UE satisfaction counts.
 */
export function run_once(seed: bigint, ue_count: number, apps_per_ue: number, class_count: number, load_mbits: number, los_probability: number): string;

/**
 * Generate a scenario and return its geometry: UE positions, LoS flags,
 * and the delay classes of each UE's apps.
 */
export function scenario_layout(seed: bigint, ue_count: number, apps_per_ue: number, class_count: number, los_probability: number): string;

/**
 * Sweep the per-app load and return mean violation rates for both
 * policies, paired over `reps` seeded replications per point.
 */
export function sweep_load(seed: bigint, ue_count: number, apps_per_ue: number, class_count: number, los_probability: number, min_load_mbits: number, max_load_mbits: number, points: number, reps: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly run_once: (a: bigint, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly scenario_layout: (a: bigint, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly sweep_load: (a: bigint, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
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
