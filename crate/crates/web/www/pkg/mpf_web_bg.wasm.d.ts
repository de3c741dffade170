/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demo_free: (a: number, b: number) => void;
export const demo_advance: (a: number) => number;
export const demo_encoder: (a: number) => [number, number];
export const demo_in_contact: (a: number) => number;
export const demo_new: (a: bigint) => [number, number, number];
export const demo_particles: (a: number, b: number) => [number, number];
export const demo_step_index: (a: number) => number;
export const demo_steps: (a: number) => number;
export const demo_truth: (a: number) => [number, number];
export const demo_wrmse: (a: number) => [number, number];
export const manifold_samples: (a: number, b: bigint) => [number, number, number, number];
export const sdf_slice: () => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
