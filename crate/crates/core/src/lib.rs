pub mod algebra;
pub mod analysis;
pub mod attacks;
pub mod audit;
pub mod chaos;
pub mod cipher;
pub mod error;
pub mod experiments;
pub mod exec;
pub mod image;
pub mod key;
pub mod ppm;

pub use error::{Error, Result};
pub use exec::Exec;
pub use image::{PixelBlock, RgbImage};
pub use key::SecretKey;
