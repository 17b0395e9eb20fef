pub mod apps;
pub mod dump;
pub mod forwarder;
pub mod message;
pub mod metrics;
pub mod mobility;
pub mod name;
pub mod output;
pub mod runner;
pub mod scenario;
pub mod sim;
pub mod simulation;
pub mod topology;
pub mod transport;
