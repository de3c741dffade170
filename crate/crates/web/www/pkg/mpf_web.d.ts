/* tslint:disable */
/* eslint-disable */

export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Advance truth and every filter by one scripted command. Returns false
     * once the script is exhausted.
     */
    advance(): boolean;
    /**
     * Encoder reading.
     */
    encoder(): Float64Array;
    /**
     * Whether the tip sensor reported contact on the last step.
     */
    in_contact(): boolean;
    constructor(seed: bigint);
    /**
     * Particles of filter `index` as `[q1, q2, weight]` triples.
     */
    particles(index: number): Float64Array;
    /**
     * Steps taken so far.
     */
    step_index(): number;
    /**
     * Number of scripted steps.
     */
    steps(): number;
    /**
     * True joint angles.
     */
    truth(): Float64Array;
    /**
     * Current W-RMSE of every filter, in display order.
     */
    wrmse(): Float64Array;
}

/**
 * `n` uniform-projection samples of the tip-contact manifold as `[q1, q2]`
 * pairs. Failed projections are dropped, so fewer pairs may come back.
 */
export function manifold_samples(n: number, seed: bigint): Float64Array;

/**
 * The z = 0 slice of the scenario's distance field, row-major with `x`
 * varying fastest, preceded by `[nx, ny, min_x, min_y, max_x, max_y]`.
 */
export function sdf_slice(): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly demo_advance: (a: number) => number;
    readonly demo_encoder: (a: number) => [number, number];
    readonly demo_in_contact: (a: number) => number;
    readonly demo_new: (a: bigint) => [number, number, number];
    readonly demo_particles: (a: number, b: number) => [number, number];
    readonly demo_step_index: (a: number) => number;
    readonly demo_steps: (a: number) => number;
    readonly demo_truth: (a: number) => [number, number];
    readonly demo_wrmse: (a: number) => [number, number];
    readonly manifold_samples: (a: number, b: bigint) => [number, number, number, number];
    readonly sdf_slice: () => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
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
