pub mod optimize;
pub mod spike_demo;
pub mod sweep;
pub mod verify;
