#!/usr/bin/env python3

from .c2rnet import C2RNet
from .ndp_branch import NDPBranch
from .rst_parser import FusionMode, LabelInventory, RSTParser

__all__ = [
    "C2RNet",
    "NDPBranch",
    "RSTParser",
    "FusionMode",
    "LabelInventory",
]
