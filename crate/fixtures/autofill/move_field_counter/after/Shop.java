public class Shop {
    Stats stats = new Stats();

    void add() {
        stats.count++;
        log("count changed");
    }

    void reset() {
        // count goes back to zero
        stats.count = 0;
    }

    int report() {
        return stats.count * 2;
    }

    void log(String message) {
        System.out.println(message);
    }
}
