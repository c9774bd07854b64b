/* tslint:disable */
/* eslint-disable */

/**
 * Huffman-codes a synthetic stream and compares against its empirical entropy.
 */
export function huffman_ratio(bits: number, zero_fraction: number, words: number, seed: bigint): string;

/**
 * Simulates a small 3x3 layer with synthetic operands and prices it with the default model.
 */
export function power_breakdown(weight_bits: number, image_bits: number, weight_zeros: number, image_zeros: number, voltage: number, frequency_mhz: number, guarding: boolean): string;

/**
 * Cycle trace of the first tile of a single-channel layer plus whole-layer fetch ratios.
 */
export function tile_trace(kernel: number, stride: number, width: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly huffman_ratio: (a: number, b: number, c: number, d: bigint) => [number, number, number, number];
    readonly power_breakdown: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly tile_trace: (a: number, b: number, c: number) => [number, number, number, number];
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
