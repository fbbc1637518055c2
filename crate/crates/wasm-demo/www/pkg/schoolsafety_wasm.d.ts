/* tslint:disable */
/* eslint-disable */

/**
 * 2025–2030 forecasts from the bundled corpus. `target` is "events" or
 * "casualties"; `holdout_percent` of 0 scores in-sample.
 */
export function forecast(target: string, holdout_percent: number): string;

/**
 * Per-school annual and lifetime odds under a uniform rate.
 */
export function school_odds(events: number, years: number, schools: number, exposure_years: number): string;

/**
 * One attack with bullets spread evenly over the window. A positive
 * `target_rate` first calibrates `i_high` to that casualty rate.
 */
export function simulate_attack(bullet_budget: number, t_cop: number, stop_rate: number, i_high: number, i_low_decay: number, target_rate: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly forecast: (a: number, b: number, c: number) => [number, number, number, number];
    readonly school_odds: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly simulate_attack: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
