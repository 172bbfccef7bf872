#![allow(dead_code)]

pub mod tmm;
pub mod synth;
