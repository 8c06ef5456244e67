pub mod automaton;
pub mod cli;
pub mod dataset;
pub mod eval;
pub mod decode;
pub mod grounding;
pub mod ltl;
pub mod patterns;
pub mod planner;
