pub mod assign;
pub mod filters;
pub mod fusion;
pub mod gm;
pub mod labeled;
pub mod linalg;
pub mod models;
pub mod oracle;
pub mod sensors;
pub mod sim;
