// Wire types for the session API payloads. These mirror the backend's
// canonical record encoding exactly; the UI never recomputes costs or
// feasibility from them, it only displays.

export interface MoneyRecord {
  amount: number; // integer minor units
  currency: string;
}

export interface GeoPointRecord {
  lat: number;
  lon: number;
}

export interface PoiRecord {
  id: string;
  name: string;
  category: string;
  city: string;
  location: GeoPointRecord;
  hours: [number, number, number][]; // [day-of-week, start, end]
  price: MoneyRecord;
  visit_duration: number;
  utility: number;
  accessibility: string[];
  images: { uri: string; kind: string }[];
}

export type VisitTuple = [string, number, number]; // [poi_id, start, end]

export interface ItineraryRecord {
  visits: VisitTuple[];
  total_cost: MoneyRecord;
  total_utility: number;
}

export interface StepRecord {
  text: string;
  refs: string[];
  data: Record<string, number | number[]> | null;
}

export interface ChainRecord {
  spatial: StepRecord[];
  temporal: StepRecord[];
  practical: StepRecord[];
}

export interface ToolCallRecord {
  tool: string;
  args: Record<string, unknown>;
  request_id: string;
}

export interface ToolResponseRecord {
  request_id: string;
  status: string;
  payload: unknown;
}

export interface QuerySpecRecord {
  destination: string | null;
  days: number | null;
  budget: MoneyRecord | null;
  group_size: number | null;
  access_needs: string[];
  landmark_hint: string | null;
  quality_requested: boolean;
  free_text: string;
}

export interface InstanceRecord {
  candidates: PoiRecord[];
  edges: [string, string, number][];
  day: number;
  day_window: [number, number];
  budget: MoneyRecord | null;
  group_size: number;
  required_access: string[];
}

export interface TracePayload {
  query_spec: QuerySpecRecord;
  config: Record<string, unknown>;
  outcome: string;
  chain: ChainRecord | null;
  events: [ToolCallRecord, ToolResponseRecord][];
  instance: InstanceRecord | null;
  itinerary: ItineraryRecord | null;
  verdicts: string[];
  unresolved: string[][];
  notes: string[];
  summary: string[];
  refinements: Record<string, unknown>[];
}

export interface RefineBody {
  new_budget?: number;
  lock?: string[];
  exclude?: string[];
  shift_window?: [number, number];
}
