//! DDoS attack-type and 5G latency-quality classification over network
//! flow records: ingestion, a synthetic flow generator, radio telemetry
//! augmentation, preprocessing, SMOTE, feature selection, an eight-model
//! classifier suite and reporting.

pub mod augment5g;
pub mod balance;
pub mod featsel;
pub mod ingest;
pub mod learners;
pub mod pipeline;
pub mod preprocess;
pub mod report;
pub mod schema;
pub mod seed;
pub mod synthgen;
pub mod tabular;
