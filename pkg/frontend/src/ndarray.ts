/**
 * Array interchange: {dtype, shape, b64} descriptors carrying raw
 * little-endian C-order bytes. Typed arrays view the decoded buffer
 * zero-copy; encoding copies once into the base64 string.
 */

export type Dtype =
  | "float32"
  | "float64"
  | "int32"
  | "int64"
  | "uint8"
  | "bool";

export interface NdDescriptor {
  dtype: Dtype;
  shape: number[];
  b64: string;
}

export type TypedArray =
  | Float32Array
  | Float64Array
  | Int32Array
  | BigInt64Array
  | Uint8Array;

export interface NdArray {
  dtype: Dtype;
  shape: number[];
  data: TypedArray;
}

export function numel(shape: number[]): number {
  return shape.reduce((a, b) => a * b, 1);
}

export function encode(arr: NdArray): NdDescriptor {
  const bytes = new Uint8Array(arr.data.buffer, arr.data.byteOffset, arr.data.byteLength);
  return {
    dtype: arr.dtype,
    shape: [...arr.shape],
    b64: Buffer.from(bytes).toString("base64"),
  };
}

export function decode(desc: NdDescriptor): NdArray {
  const buf = Buffer.from(desc.b64, "base64");
  const ab = buf.buffer.slice(buf.byteOffset, buf.byteOffset + buf.byteLength);
  let data: TypedArray;
  switch (desc.dtype) {
    case "float32":
      data = new Float32Array(ab);
      break;
    case "float64":
      data = new Float64Array(ab);
      break;
    case "int32":
      data = new Int32Array(ab);
      break;
    case "int64":
      data = new BigInt64Array(ab);
      break;
    case "uint8":
    case "bool":
      data = new Uint8Array(ab);
      break;
    default:
      throw new Error(`unsupported dtype ${desc.dtype}`);
  }
  const n = numel(desc.shape);
  if (data.length !== n) {
    throw new Error(`descriptor claims ${n} elements, payload holds ${data.length}`);
  }
  return { dtype: desc.dtype, shape: desc.shape, data };
}

export function fromFloat64(shape: number[], data: Float64Array | number[]): NdArray {
  const arr = data instanceof Float64Array ? data : Float64Array.from(data);
  if (arr.length !== numel(shape)) {
    throw new Error(`shape ${JSON.stringify(shape)} needs ${numel(shape)} elements, got ${arr.length}`);
  }
  return { dtype: "float64", shape, data: arr };
}
