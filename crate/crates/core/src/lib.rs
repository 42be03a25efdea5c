pub mod dynamics;
pub mod fuzzy;
pub mod controller;
pub mod simulation;
pub mod pso;
pub mod cli;
pub mod svg;
