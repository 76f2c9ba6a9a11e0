pub mod acceptance;
pub mod bracket;
pub mod commands;
pub mod error;
pub mod families;
pub mod integrability;
pub mod io;
pub mod limitops;
pub mod lipschitz;
pub mod lp;
pub mod measure;
pub mod noncompactness;
pub mod oracle;
pub mod report;
pub mod space;
pub mod transport;
pub mod wasserstein;
