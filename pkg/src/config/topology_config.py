class TopologyConfig:
    """
    Sizing of the stream topology: queues between spout, workers and barrier, and failure deadlines
    """
    def __init__(self, workers: int = 1, mode: str = 'inproc'):
        # Number of detection workers, each owns a contiguous range of bins
        self.workers = workers
        # 'inproc' runs workers as threads, 'socket' as processes talking TCP frames
        self.mode = mode

        # Bounded FIFO between the spout and every worker, a full queue blocks the spout
        self.worker_queue_size = 256
        # Bounded FIFO from the workers into the barrier
        self.barrier_queue_size = 1024
        # Max batches the barrier holds before giving up on a slow worker
        self.barrier_high_watermark = 4096
        # Seconds a worker may stay silent while the barrier waits on it
        self.stall_timeout_s = 30.0

        # Socket mode, coordinator listens here and workers connect back
        self.wire_host = '127.0.0.1'
        # 0 lets the OS pick a free port
        self.wire_port = 0
        # Seconds allowed for all worker processes to connect
        self.connect_timeout_s = 30.0
