pub mod ckks;
pub mod control;
pub mod encoding;
pub mod lwe_gsw;
pub mod modarith;
pub mod paillier;
pub mod sim;
