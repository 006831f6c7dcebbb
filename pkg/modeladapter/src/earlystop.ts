/**
 * Early stopping on a loss stream: training stops once the loss has failed
 * to improve for `patience` consecutive epochs, always before the epoch
 * cap.
 */
export class EarlyStopping {
  readonly patience: number;
  private best = Number.POSITIVE_INFINITY;
  private sinceImprovement = 0;
  stoppedEpoch: number | null = null;

  constructor(patience: number) {
    if (patience < 1) {
      throw new Error(`patience must be >= 1, got ${patience}`);
    }
    this.patience = patience;
  }

  /** Record one epoch's loss; returns true when training should stop. */
  update(loss: number, epoch: number): boolean {
    if (loss < this.best) {
      this.best = loss;
      this.sinceImprovement = 0;
      return false;
    }
    this.sinceImprovement += 1;
    if (this.sinceImprovement >= this.patience) {
      this.stoppedEpoch = epoch;
      return true;
    }
    return false;
  }
}
