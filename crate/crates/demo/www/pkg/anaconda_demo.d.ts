/* tslint:disable */
/* eslint-disable */

/**
 * The eight urban cameras, a learning team, and the headings on screen.
 */
export class UrbanDemo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * `x, y, heading, radius, angle of view` per camera, flattened.
     */
    cameras(): Float64Array;
    cell_size(): number;
    /**
     * Per cell, row-major from the bottom: 0 outside the blocks, 1 dark, 2 seen.
     */
    cell_states(): Uint8Array;
    cols(): number;
    /**
     * Percent of the interest area covered by the current headings.
     */
    coverage(): number;
    constructor(alpha: number, seed: number);
    /**
     * Turns one camera to its next heading, counter-clockwise.
     */
    rotate(camera: number): number;
    rounds(): number;
    rows(): number;
    /**
     * Runs `rounds` learning rounds; returns the coverage percentage.
     */
    step(rounds: number): number;
}

/**
 * Simulated seconds for one round with bandwidth `alpha`.
 */
export function round_time(alpha: number, tau_f: number, tau_c: number): number;

/**
 * Rounds completed within `budget` seconds.
 */
export function rounds_within(budget: number, alpha: number, tau_f: number, tau_c: number): number;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_urbandemo_free: (a: number, b: number) => void;
    readonly round_time: (a: number, b: number, c: number) => [number, number, number];
    readonly rounds_within: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly urbandemo_cameras: (a: number) => [number, number];
    readonly urbandemo_cell_size: (a: number) => number;
    readonly urbandemo_cell_states: (a: number) => [number, number];
    readonly urbandemo_cols: (a: number) => number;
    readonly urbandemo_coverage: (a: number) => number;
    readonly urbandemo_new: (a: number, b: number) => [number, number, number];
    readonly urbandemo_rotate: (a: number, b: number) => number;
    readonly urbandemo_rounds: (a: number) => number;
    readonly urbandemo_rows: (a: number) => number;
    readonly urbandemo_step: (a: number, b: number) => [number, number, number];
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
