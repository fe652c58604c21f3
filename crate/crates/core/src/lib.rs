pub mod chow;
pub mod coeffs;
pub mod commands;
pub mod compactified;
pub mod fans;
pub mod ihomology;
pub mod qlinalg;
