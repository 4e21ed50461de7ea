package demo.work;

import java.util.concurrent.Callable;
import java.util.function.BiFunction;

public class Worker implements Runnable {
    private volatile boolean running = true;
    private final Object lock = new Object();

    @Override
    public void run() {
        int ticks = 0;
        do {
            synchronized (lock) {
                ticks++;
            }
        } while (running && ticks < 3);
    }

    public void stop() {
        running = false;
    }

    public static <R> R call(Callable<? extends R> task) throws Exception {
        return task.call();
    }

    public static int combine(int a, int b) {
        BiFunction<Integer, Integer, Integer> plus = (Integer x, Integer y) -> x + y;
        return plus.apply(a, b);
    }
}
