"""Seeding and threading settings for reproducible torch runs."""

import logging

import torch


def configure_torch(seed, num_threads=1):
    """Seed torch's global generator and fix the intra-op thread count.

    Results are bit-identical across runs with the same seed and thread count.
    Different thread counts may change floating-point reduction order.
    """
    torch.manual_seed(int(seed))
    if num_threads:
        torch.set_num_threads(int(num_threads))
    torch.use_deterministic_algorithms(True, warn_only=True)
    logging.info('Seeded torch with {} ({} threads).'.format(
        seed, torch.get_num_threads()))


def torch_generator(seed):
    """A torch.Generator seeded with seed, independent of the global one."""
    generator = torch.Generator()
    generator.manual_seed(int(seed))
    return generator
