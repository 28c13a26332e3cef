export {
  Bridge,
  World,
  type CostModel,
  type EvalReport,
  type EvalRow,
  type Plan,
  type PolicySpec,
  type SolveRequest,
  type VariationOptions,
  type WorldSnapshot,
} from "./bridge";
export { BridgeError, type CostQuery } from "./worker";
export {
  decode,
  encode,
  fromFloat64,
  numel,
  type Dtype,
  type NdArray,
  type NdDescriptor,
} from "./ndarray";
