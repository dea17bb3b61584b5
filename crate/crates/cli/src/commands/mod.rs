pub mod evaluate;
pub mod fit;
pub mod groups;
pub mod ingest;
pub mod report;
