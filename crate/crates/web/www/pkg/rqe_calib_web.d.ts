/* tslint:disable */
/* eslint-disable */

export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Flat xyz positions for the truth moved by `delta`.
     */
    cloud(delta: Float64Array): Float32Array;
    /**
     * Cost at `steps` offsets in `[-half, half]` from the truth along one parameter.
     */
    costSlice(param: number, half: number, steps: number): Float64Array;
    /**
     * Simulates `duration` seconds with the default ground truth and a lidar
     * clock offset of `td_ms`.
     */
    constructor(env: string, seed: number, duration: number, noisy: boolean, td_ms: number, stride: number, sigma: number);
    numPoints(): number;
    /**
     * Cost over time offsets around the injected one, calibration fixed at
     * the truth moved by `delta`.
     */
    timeCurve(half_ms: number, steps: number, delta: Float64Array): Float64Array;
    /**
     * x, y, z (m), phi, theta, psi (deg), s, td (ms).
     */
    truth(): Float64Array;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly demo_cloud: (a: number, b: number, c: number) => [number, number, number, number];
    readonly demo_costSlice: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly demo_new: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number];
    readonly demo_numPoints: (a: number) => number;
    readonly demo_timeCurve: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly demo_truth: (a: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
