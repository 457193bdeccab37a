// Wire types mirrored from the analysis service's JSON output.

export interface DeckMetadata {
  deck_id: string;
  deck: string;
  deck_url: string | null;
  source_file: string;
  total_slides: number;
  processed_at: string;
}

export interface SectionPlan {
  section_id: string;
  start_slide: number;
  end_slide: number;
  section_title: string;
  section_summary: string;
}

export interface DeckAnalysis {
  deck_topic: string;
  target_audience: string;
  learning_goals: string[];
  sections: SectionPlan[];
  coverage_targets: string[];
  global_notes: string;
}

export interface SlideAction {
  slide_number: number;
  action: "keep" | "reduce" | "expand" | "zero_out" | "rewrite";
  new_question_budget: number;
  reason: string;
}

export interface Reconciliation {
  revised_slide_actions: SlideAction[];
  deck_reconciliation_notes: string;
  uncovered_learning_goals: string[];
  redundancy_warnings: string[];
}

export interface Question {
  question_id: string;
  question_type: string;
  prompt: string;
  options: string[];
  answer: string;
  evidence_span: string;
  difficulty: string;
  purpose: string;
  fidelity_score: number;
  fidelity_notes: string;
}

export interface SlideEvaluation {
  coverage_score: number | null;
  coverage_notes: string;
  scaffolding_score: number | null;
  scaffolding_notes: string;
}

export interface Slide {
  slide_id: string;
  slide_number: number;
  slide_title: string;
  modality_type: string;
  role_in_deck: string;
  local_summary: string;
  key_concepts: string[];
  evidence_regions: string[];
  eligible_for_questions: boolean;
  eligibility_reason: string;
  question_budget: number;
  question_mix: string[];
  questions: Question[];
  evaluation: SlideEvaluation;
}

export interface FinalDocument {
  schema_version: string;
  field_descriptions: Record<string, string>;
  deck_metadata: DeckMetadata;
  deck_analysis: DeckAnalysis;
  reconciliation: Reconciliation;
  slides: Slide[];
}

export interface StreamEvent {
  event: string;
  at: string;
  [key: string]: unknown;
}
