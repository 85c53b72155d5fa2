# -*- coding: utf-8 -*-

# Imports #####################################################################

import json
import os
from typing import Dict, Optional

import h5py
import numpy as np

FORMAT_TAG = "rta_ablation-checkpoint/1"

# Functions ###################################################################


def save_checkpoint(path: str, tensors: Dict[str, np.ndarray], metadata: Optional[dict] = None):
    """
    Write named network tensors to an HDF5 file

    Parameters
    ----------
    path : str
        Target .h5 file; parent directories are created
    tensors : dict
        "<network>/<parameter>" -> array
    metadata : dict, optional
        JSON-serialisable run description stored as a file attribute

    Returns
    -------
    path : str
        The written file
    """
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    tmp_path = f"{path}.tmp"
    with h5py.File(tmp_path, "w", track_order=True) as hdf:
        hdf.attrs["format"] = FORMAT_TAG
        hdf.attrs["metadata"] = json.dumps(metadata or {}, sort_keys=True)
        for name in sorted(tensors):
            # flat dataset names without timestamps so reruns produce identical files
            hdf.create_dataset(
                name.replace("/", "."), data=np.asarray(tensors[name], dtype=np.float64), track_times=False
            )
    os.replace(tmp_path, path)
    return path


def load_checkpoint(path: str):
    """
    Read a checkpoint written by save_checkpoint

    Parameters
    ----------
    path : str
        The .h5 file

    Returns
    -------
    tensors : dict
        "<network>/<parameter>" -> array
    metadata : dict
        The stored run description
    """
    tensors = {}
    with h5py.File(path, "r") as hdf:
        tag = hdf.attrs.get("format")
        if isinstance(tag, bytes):
            tag = tag.decode("utf-8")
        if tag != FORMAT_TAG:
            raise ValueError(f"{path} is not an rta_ablation checkpoint (format {tag!r})")
        metadata = json.loads(hdf.attrs.get("metadata", "{}"))

        def collect(name, node):
            if isinstance(node, h5py.Dataset):
                tensors[name.replace(".", "/", 1)] = node[()]

        hdf.visititems(collect)
    return tensors, metadata
