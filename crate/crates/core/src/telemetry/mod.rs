//! Telemetry: wire protocol, TCP ingestion, simulated nodes, persistence,
//! and the daily feature join.

pub mod dataset;
pub mod server;
pub mod sim;
pub mod store;
pub mod wire;

pub use dataset::join_daily;
pub use server::{serve, ReadingSink, ServerHandle, ServerReport};
pub use sim::{
    simulate_node, simulate_nodes_sequential, Generator, GeneratorKind, NodeProfile, Waveform,
};
pub use store::{
    append_plant_record, append_reading, load_plant_records, load_readings, tare_adjust, FileStore,
    PlantLog, PlantRecord, ReadingLog, PLANTS_CSV_HEADER,
};
pub use wire::{
    decode_reading, encode_reading, DistanceSensor, Payload, RejectReason, SensorReading,
};
