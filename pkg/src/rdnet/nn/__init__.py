from .layers import (BatchNorm2d, Conv2d, ConvTranspose2dRange, Parameter,
                     ReLU, ResidualBlock, Sigmoid)
from .losses import (bce, detection_loss, focal, mtl_loss, seg_loss,
                     smooth_l1)
from .model import FftRadNet, ModelSpec, build_fftradnet
from .optim import Adam, adam_step, scheduled_lr
from .targets import GroundTruth, encode_ground_truth
from .train import TrainConfig, train_epoch, fit

__all__ = [
    "Parameter", "Conv2d", "ConvTranspose2dRange", "BatchNorm2d", "ReLU",
    "Sigmoid", "ResidualBlock",
    "focal", "bce", "smooth_l1", "detection_loss", "seg_loss", "mtl_loss",
    "ModelSpec", "FftRadNet", "build_fftradnet",
    "Adam", "adam_step", "scheduled_lr",
    "GroundTruth", "encode_ground_truth",
    "TrainConfig", "train_epoch", "fit",
]
