/* tslint:disable */
/* eslint-disable */

/**
 * Encode `features` (each in `[0, 1]`) and return basis probabilities,
 * per-qubit Bloch vectors and purities.
 */
export function encode_state(encoding: string, features: Float64Array, n_qubits: number, two_pi: boolean): string;

/**
 * Probabilities and Z magnetization of an encoded state at `steps + 1`
 * evenly spaced times in `[0, t_max]` (drive periods for h1).
 */
export function evolve_trajectory(encoding: string, features: Float64Array, n_qubits: number, hamiltonian: string, seed: bigint, t_max: number, steps: number, periodic: boolean): string;

/**
 * Ascending eigenvalues of the reservoir operator(s).
 */
export function hamiltonian_spectrum(hamiltonian: string, n_qubits: number, seed: bigint, periodic: boolean): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly encode_state: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly evolve_trajectory: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: bigint, i: number, j: number, k: number) => [number, number, number, number];
    readonly hamiltonian_spectrum: (a: number, b: number, c: number, d: bigint, e: number) => [number, number, number, number];
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
