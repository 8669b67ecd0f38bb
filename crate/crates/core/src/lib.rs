pub mod binaural;
pub mod decode;
pub mod encode;
pub mod error;
pub mod io;
pub mod sh;
pub mod transform;

pub use error::{AmbiError, Result};
pub use io::{AmbisonicBuffer, AudioData, Convention};
