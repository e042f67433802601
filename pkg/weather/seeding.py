#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Seed derivation for deterministic procedural generation

Every random stream is a Philox-4x64 counter-based generator keyed by a
64-bit seed. Seeds are derived from (master_seed, sample_index,
layer_index, ...) through numpy's SeedSequence hashing, so a sample or a
layer can be regenerated in isolation, in any order, on any worker.
"""

import numpy as np

# Фиксированные метки потоков внутри одного сэмпла
STREAM_PARAMS = 0
STREAM_SPLIT = 1
STREAM_LAYERS = 2

_MASK64 = (1 << 64) - 1


def derive_seed(*keys: int) -> int:
    """
    Derives a 64-bit seed from a tuple of non-negative integers

    Args:
        keys: e.g. (master_seed, sample_index, layer_index)

    Returns:
        Deterministic 64-bit seed
    """
    entropy = [int(k) & _MASK64 for k in keys]
    state = np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint64)
    return int(state[0])


def make_rng(seed: int) -> np.random.Generator:
    """Генератор Philox для заданного 64-битного seed"""
    return np.random.Generator(np.random.Philox(key=int(seed) & _MASK64))


def layer_seed(master_seed: int, sample_index: int, layer_index: int) -> int:
    """seed = hash(master_seed, sample_index, layer_index)"""
    return derive_seed(master_seed, sample_index, STREAM_LAYERS, layer_index)
