pub mod algebra;
pub mod catalog;
pub mod chart;
pub mod critical;
pub mod error;
pub mod field;
pub mod flow;
pub mod ode;
pub mod pairing;
pub mod pipeline;
pub mod pseudo_gradient;
pub mod report;
pub mod svg;
pub mod tolerances;
pub mod verify;
