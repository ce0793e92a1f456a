pub mod config;
pub mod exec;
pub mod hydro;
pub mod instances;
pub mod io;
pub mod lp;
pub mod market;
pub mod mc;
pub mod milp;
pub mod output;
pub mod pipeline;
pub mod settlement;
