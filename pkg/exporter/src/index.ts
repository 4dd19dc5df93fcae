export { Adapter, ClipRequest, getAdapter, registerAdapter, syntheticAdapter } from './adapters';
export { exportEmbeddings, ExportResult } from './export';
export {
  ClipPlan,
  IndexRecord,
  Manifest,
  ManifestVideo,
  PlanFile,
  StoreMeta,
  StoreRecord,
  VideoPlan,
  decodeF32LE,
  encodeF32LE,
  readEmbeddingSet,
  readManifest,
  readPlanFile,
  writeEmbeddingSet,
  writePlanFile,
} from './formats';
export { reversePlan } from './reverse';
