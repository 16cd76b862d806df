// Payload shapes of the backend API. The UI renders these numbers verbatim;
// it never recomputes badges, streaks, or aggregates client-side.

export interface ScoreTriple {
  rice: number;
  meat: number;
  vegetables: number;
}

export interface BadgeProgressPayload {
  earned: boolean;
  earned_at: string | null;
  progress: number;
}

export type BadgeKind = "attempt" | "persistence" | "quantity" | "quality";

export const BADGE_KINDS: readonly BadgeKind[] = [
  "attempt",
  "persistence",
  "quantity",
  "quality",
];

export interface BadgeStatePayload {
  attempt: BadgeProgressPayload;
  persistence: BadgeProgressPayload;
  quantity: BadgeProgressPayload;
  quality: BadgeProgressPayload;
  reward_eligible: boolean;
}

export interface BadgesResponse {
  badge_state: BadgeStatePayload;
  earner_counts: Record<BadgeKind, number>;
}

export interface RecordPayload {
  record_id: string;
  date: string;
  submitted_at: string;
  scores: ScoreTriple;
  overall: number;
  photo_url: string;
}

export interface AveragesPayload extends ScoreTriple {
  overall: number;
  no_data: boolean;
}

export interface OverviewPayload {
  user: {
    display_name: string;
    record_count: number;
    averages: AveragesPayload;
  };
  community: AveragesPayload;
  badge_state: BadgeStatePayload;
  recent_records: RecordPayload[];
}

export type SeverityLevel = "severe" | "medium" | "light";

export interface DailyPayload {
  date: string;
  total_trays: number;
  severity_counts: Record<SeverityLevel, number>;
  bowls: SeverityLevel[];
  type_percent: ScoreTriple;
  total_waste_g: number;
  computed_at: string;
}

export interface MonthlyDayEntry {
  date: string;
  severity_counts: Record<SeverityLevel, number>;
}

export interface MonthlyPayload {
  month: string;
  days: MonthlyDayEntry[];
  computed_at: string;
}

export interface SubmitResponse {
  record_id: string;
  badge_state: BadgeStatePayload;
  newly_earned: BadgeKind[];
}
