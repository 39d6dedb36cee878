//! Structure extraction from trained chains.

pub mod activity;
pub mod circle;
pub mod connectivity;
pub mod factorial;
pub mod logic;
pub mod structure;

pub use activity::{
    activity_map, classify_encoders, populated_band, ActivityMap, ClassifyParams, EncoderLabel,
    NodeClassification,
};
pub use connectivity::{
    permute_for_clarity, threshold_connectivity, threshold_connectivity_relative,
    ConnectivityGraph, StageConnectivity,
};
pub use factorial::{detect_factorial_groups, sensitivity_matrix, FactorialGroups, SensitivityParams};
pub use logic::{extract_logic, extract_logic_relative, Conjunction, Literal, LogicReport};
pub use structure::{check_hierarchical, AnalysisParams, MapSummary, StructureReport};
pub use circle::{circle_arcs, ArcReport, CodeArcs};
