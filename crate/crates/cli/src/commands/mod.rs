pub mod cases;
pub mod derive;
pub mod simulate;
pub mod verify;
