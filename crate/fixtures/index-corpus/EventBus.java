package demo.events;

import java.util.ArrayList;
import java.util.List;

public class EventBus {
    public interface Listener {
        void on(String event);
    }

    private static int created;
    private final List<Listener> listeners = new ArrayList<>();

    static {
        created = 0;
    }

    public EventBus() {
        this(true);
    }

    private EventBus(boolean count) {
        if (count) {
            created++;
        }
    }

    public void subscribe(Listener listener) {
        listeners.add(listener);
    }

    public Listener logging(StringBuilder sink) {
        class Prefix {
            String apply(String s) {
                return "[bus] " + s;
            }
        }
        Prefix prefix = new Prefix();
        return new Listener() {
            @Override
            public void on(String event) {
                sink.append(prefix.apply(event)).append('\n');
            }
        };
    }

    public void publish(String event) {
        listeners.forEach(l -> l.on(event));
    }
}
