public class Client {
    private int timeout = 30;
    private final Transport transport;

    Client(Transport transport) {
        this.transport = transport;
    }

    void send(String body) {
        transport.write(body, timeout);
    }

    void extend(int seconds) {
        timeout = timeout + seconds;
    }
}
