//! Typhoon resilience assessment for geo-referenced power transmission
//! networks.
//!
//! The pipeline runs in five stages: a parametric wind field evolves a
//! storm along its track; tower-line units accumulate failure hazards into
//! corridor failure probabilities; a data-driven correction rescales those
//! probabilities from terrain, rainfall and corridor attributes; impact
//! increments over enumerated contingency states, each priced by a DC
//! optimal load-shedding program, yield system- and corridor-level
//! resilience indices; and candidate hardening strategies are costed and
//! ranked by cost-effectiveness.

pub mod ahp;
pub mod case;
pub mod config;
pub mod failure;
pub mod features;
pub mod geo;
pub mod importance;
pub mod lp;
pub mod pipeline;
pub mod resilience;
pub mod scenario;
pub mod shed;
pub mod strategy;
pub mod terrain;
pub mod typhoon;
