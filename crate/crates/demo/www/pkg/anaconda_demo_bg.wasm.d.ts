/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_urbandemo_free: (a: number, b: number) => void;
export const round_time: (a: number, b: number, c: number) => [number, number, number];
export const rounds_within: (a: number, b: number, c: number, d: number) => [number, number, number];
export const urbandemo_cameras: (a: number) => [number, number];
export const urbandemo_cell_size: (a: number) => number;
export const urbandemo_cell_states: (a: number) => [number, number];
export const urbandemo_cols: (a: number) => number;
export const urbandemo_coverage: (a: number) => number;
export const urbandemo_new: (a: number, b: number) => [number, number, number];
export const urbandemo_rotate: (a: number, b: number) => number;
export const urbandemo_rounds: (a: number) => number;
export const urbandemo_rows: (a: number) => number;
export const urbandemo_step: (a: number, b: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
