// Kiosk page rotation: cycles through pages forever at a fixed interval.

export interface TimerLike {
  setTimeout(handler: () => void, timeout: number): ReturnType<typeof setTimeout>;
  clearTimeout(id: ReturnType<typeof setTimeout>): void;
}

export class RotationController<T> {
  private index = -1;
  private timerId: ReturnType<typeof setTimeout> | null = null;
  private running = false;

  constructor(
    private readonly pages: readonly T[],
    private readonly intervalMs: number,
    private readonly onShow: (page: T, index: number) => void,
    private readonly timer: TimerLike = globalThis,
  ) {
    if (pages.length === 0) throw new Error("rotation needs at least one page");
    if (intervalMs <= 0) throw new Error("rotation interval must be positive");
  }

  get currentIndex(): number {
    return this.index;
  }

  /** Shows the first page immediately, then advances forever. */
  start(): void {
    if (this.running) return;
    this.running = true;
    this.advance();
  }

  stop(): void {
    this.running = false;
    if (this.timerId !== null) {
      this.timer.clearTimeout(this.timerId);
      this.timerId = null;
    }
  }

  private advance(): void {
    if (!this.running) return;
    this.index = (this.index + 1) % this.pages.length;
    this.onShow(this.pages[this.index], this.index);
    this.timerId = this.timer.setTimeout(() => this.advance(), this.intervalMs);
  }
}
