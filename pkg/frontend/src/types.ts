/** Server JSON shapes, mirrored field-for-field. */

export interface PolicyJson {
  name: string;
  [param: string]: string | number | null;
}

export interface RecordJson {
  id: number;
  description: string;
  kind: string | null;
  p_value: number | null;
  support: number | null;
  budget: number | null;
  decision: "rejected" | "accepted" | "untested" | "descriptive";
  starred: boolean;
  superseded_by: number | null;
  statistic: number | null;
  df: number | null;
  warning: string | null;
  flip_factor_to_reject: number | null;
  flip_factor_to_accept: number | null;
}

export interface SessionJson {
  id: string;
  alpha: number;
  eta: number;
  omega: number;
  policy: PolicyJson;
  wealth: number;
  exhausted: boolean;
  dataset: string;
  row_count: number;
  records: RecordJson[];
}

export interface FlipJson {
  id: number;
  direction: "to_reject" | "to_accept";
  flip_factor: number | null;
  unreachable: boolean;
}

export interface DatasetInfoJson {
  name: string;
  row_count: number;
  columns: { name: string; kind: "categorical" | "numeric" }[];
}
