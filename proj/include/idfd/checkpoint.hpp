#pragma once

#include <filesystem>

#include "idfd/trainer.hpp"

namespace idfd {

/// Binary checkpoint, all integers and IEEE-754 doubles little-endian:
///
///   "IDFDCKPT"            8 bytes
///   version               u32 (= 1)
///   epoch                 u64
///   layer count L         u32
///   L x { in u32, out u32, weight in*out f64 (row-major), bias out f64 }
///   L x { velocity weight in*out f64, velocity bias out f64 }
///   bank n u32, d u32, momentum f64, rows n*d f64
///   rng seed u64, state 4 x u64, has_spare u8, spare f64
///
/// Loading reproduces the TrainState bit for bit.
void save_checkpoint(const std::filesystem::path& path, const TrainState& state);
TrainState load_checkpoint(const std::filesystem::path& path);

}  // namespace idfd
