/* tslint:disable */
/* eslint-disable */

/**
 * The demo intersection with its visibility matrices precomputed.
 */
export class Planner {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * One state code per grid cell for a hand-picked selection.
     */
    coverage(lidar: Uint32Array, radar: Uint32Array): Uint8Array;
    /**
     * Grid, ROI weights, occluders and candidate mounts as JSON.
     */
    layout(): string;
    /**
     * Builds the demo scene and ray-casts every candidate. Takes a moment.
     */
    constructor(road_half_width: number, buildings: boolean);
    /**
     * Solves the placement and returns the chosen indices and coverage as JSON.
     */
    optimize(budget: number, tau: number, solver: string): string;
}

/**
 * Rotated-box IoU with the footprints and their clipped overlap, as JSON.
 * Boxes are `[x, y, z, length, width, height, yaw]`.
 */
export function box_overlap(a: Float64Array, b: Float64Array): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_planner_free: (a: number, b: number) => void;
    readonly box_overlap: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly planner_coverage: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly planner_layout: (a: number) => [number, number];
    readonly planner_new: (a: number, b: number) => [number, number, number];
    readonly planner_optimize: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
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
