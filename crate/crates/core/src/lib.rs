pub mod appell;
pub mod chars;
pub mod cyclo;
pub mod error;
pub mod field;
pub mod hyperff;
pub mod sums;
pub mod verify;
