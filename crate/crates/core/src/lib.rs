//! Multi-robot resource collection in a grid world, driven by evolved
//! Artificial Neural Tissue (ANT) controllers or fixed-topology baselines.

pub mod controller;
pub mod rng;
pub mod world;
pub mod ant;
pub mod hexfloat;
pub mod baselines;
pub mod genome;
pub mod trace;
pub mod evolve;
pub mod experiments;
